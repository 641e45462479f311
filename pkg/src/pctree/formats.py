"""Text formats: tree notation, restriction instance files, result CSV.

Tree notation
    P-nodes are parenthesized groups ``( ... )``, C-nodes bracketed
    groups ``[ ... ]``, leaves non-negative integers; entries are
    whitespace-separated, e.g. ``[0 1 2 (3 (4 5)) 6]``.  Leaf ids must be
    exactly 0..n-1.  ``format_tree`` emits a canonical form: P-children
    sorted by minimum descendant leaf id, C-children rotated/reflected to
    start at the minimum descendant and proceed toward the smaller
    second entry, so equal trees yield equal strings.

Instance files
    Line-oriented, UTF-8, LF.  Each instance starts with ``n=<leaves>``,
    followed by one restriction per line (space-separated leaf ids), the
    final restriction prefixed ``query``, and an optional trailing
    ``expect possible`` / ``expect impossible``.  Blank lines and ``#``
    comments are ignored.  A tree is persisted as the restrictions that
    rebuild it, not as tree text.

Result CSV
    Header ``instance,tree_size,restriction_size,tp_length,time_ns,result``
    with one row per timed restriction; ``tp_length`` is empty when the
    restriction was impossible.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

from .core import (
    C_NODE, LEAF, NO_NODE, P_NODE, PCTree, PCTreeError,
    set_child_ring, set_parent_link,
)


class TreeSyntaxError(PCTreeError):
    """Malformed tree text; carries the offending position."""

    def __init__(self, message: str, pos: int) -> None:
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class DegreeError(PCTreeError):
    """A group in the tree text violates the degree rules."""


class FormatError(PCTreeError):
    """Malformed instance file; carries the offending line number."""

    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


RESULT_CSV_HEADER = ["instance", "tree_size", "restriction_size",
                     "tp_length", "time_ns", "result"]


# ---------------------------------------------------------------------------
# tree text
# ---------------------------------------------------------------------------


def _tokenize(text: str):
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()[]":
            tokens.append((ch, i))
            i += 1
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append((int(text[i:j]), i))
            i = j
        else:
            raise TreeSyntaxError(f"unexpected character {ch!r}", i)
    return tokens


def _parse_group(tokens, idx):
    """Recursive descent over the token list; returns (ast, next index).
    AST nodes are ints for leaves and ('P'|'C', [entries], pos) tuples."""
    tok, pos = tokens[idx]
    if isinstance(tok, int):
        return tok, idx + 1
    if tok not in "([":
        raise TreeSyntaxError(f"unexpected {tok!r}", pos)
    close = ")" if tok == "(" else "]"
    kind = "P" if tok == "(" else "C"
    entries = []
    idx += 1
    while True:
        if idx >= len(tokens):
            raise TreeSyntaxError(f"missing {close!r}", pos)
        nxt, npos = tokens[idx]
        if nxt == close:
            return (kind, entries, pos), idx + 1
        if nxt in (")", "]"):
            raise TreeSyntaxError(f"mismatched {nxt!r}", npos)
        entry, idx = _parse_group(tokens, idx)
        entries.append(entry)


def parse_tree(text: str) -> PCTree:
    """Parse tree notation into a PCTree whose i-th leaf carries id i."""
    tokens = _tokenize(text)
    if not tokens:
        raise TreeSyntaxError("empty input", 0)
    ast, idx = _parse_group(tokens, 0)
    if idx != len(tokens):
        raise TreeSyntaxError("trailing input", tokens[idx][1])

    leaf_ids: list[int] = []

    def collect(node) -> None:
        if isinstance(node, int):
            leaf_ids.append(node)
        else:
            for e in node[1]:
                collect(e)

    collect(ast)
    if len(set(leaf_ids)) != len(leaf_ids):
        raise TreeSyntaxError("duplicate leaf id", 0)
    n = len(leaf_ids)
    if leaf_ids and (min(leaf_ids) != 0 or max(leaf_ids) != n - 1):
        raise TreeSyntaxError("leaf ids must be exactly 0..n-1", 0)

    tree = PCTree(0)
    handles = [tree._new_node(LEAF) for _ in range(n)]
    tree._leaf_set.update(handles)
    tree._num_leaves = n

    def build(node) -> int:
        if isinstance(node, int):
            return handles[node]
        kind, entries, pos = node
        if len(entries) < 2:
            raise DegreeError("inner group needs at least two entries")
        h = tree._new_node(P_NODE if kind == "P" else C_NODE)
        kids = [build(e) for e in entries]
        set_child_ring(tree, h, kids)
        for k in kids:
            set_parent_link(tree, k, h)
        return h

    if isinstance(ast, int):
        if n != 1:
            raise TreeSyntaxError("stray leaf", 0)
        tree.root = handles[0]
        return tree
    kind, entries, pos = ast
    if not entries:
        return tree  # empty tree
    if len(entries) == 1:
        raise DegreeError("root group needs at least two entries")
    if len(entries) == 2:
        # only the two-leaf degenerate is allowed at degree 2
        if not all(isinstance(e, int) for e in entries):
            raise DegreeError("degree-2 root with inner children")
        a, b = entries
        tree.root = handles[a]
        set_child_ring(tree, handles[a], [handles[b]])
        tree._nodes[handles[b]].parent = handles[a]
        return tree
    tree.root = build(ast)
    return tree


def format_tree(tree: PCTree) -> str:
    """Canonical text for a tree; equal structures give equal strings."""
    if tree.root == NO_NODE:
        return "()"
    leaf_id = {h: i for i, h in enumerate(tree.leaves)}
    nodes = tree._nodes
    if nodes[tree.root].kind == LEAF:
        kids = tree.children_of(tree.root)
        if not kids:
            return str(leaf_id[tree.root])
        ids = sorted((leaf_id[tree.root], leaf_id[kids[0]]))
        return f"({ids[0]} {ids[1]})"

    def render(h: int) -> tuple[int, str]:
        """Returns (minimum descendant leaf id, canonical text)."""
        node = nodes[h]
        if node.kind == LEAF:
            i = leaf_id[h]
            return i, str(i)
        rendered = [render(c) for c in tree.children_of(h)]
        if node.kind == P_NODE:
            rendered.sort()
            text = "(" + " ".join(r[1] for r in rendered) + ")"
            return rendered[0][0], text
        keys = [r[0] for r in rendered]
        if h == tree.root:
            best = None
            best_keys = None
            k = len(rendered)
            for seq in (rendered, list(reversed(rendered))):
                for i in range(k):
                    rot = seq[i:] + seq[:i]
                    rot_keys = [r[0] for r in rot]
                    if best is None or rot_keys < best_keys:
                        best, best_keys = rot, rot_keys
            rendered = best
        else:
            if list(reversed(keys)) < keys:
                rendered.reverse()
        text = "[" + " ".join(r[1] for r in rendered) + "]"
        return min(keys), text

    return render(tree.root)[1]


# ---------------------------------------------------------------------------
# instance files
# ---------------------------------------------------------------------------


@dataclass
class Instance:
    """One serialized test case: restrictions that rebuild a tree plus
    the query restriction to measure, with an optional expected verdict."""
    num_leaves: int
    build_restrictions: list[list[int]] = field(default_factory=list)
    query_restriction: list[int] = field(default_factory=list)
    expected: str = "unknown"  # possible | impossible | unknown


def read_instances(path) -> list[Instance]:
    instances: list[Instance] = []
    cur: Instance | None = None
    have_query = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("n="):
                if cur is not None and not have_query:
                    raise FormatError("instance without query line", lineno)
                try:
                    n = int(line[2:])
                except ValueError:
                    raise FormatError(f"bad leaf count {line!r}", lineno) from None
                if n < 0:
                    raise FormatError("negative leaf count", lineno)
                cur = Instance(num_leaves=n)
                instances.append(cur)
                have_query = False
                continue
            if cur is None:
                raise FormatError("content before first n= header", lineno)
            if line.startswith("expect"):
                verdict = line[len("expect"):].strip()
                if verdict not in ("possible", "impossible"):
                    raise FormatError(f"bad verdict {verdict!r}", lineno)
                if not have_query:
                    raise FormatError("expect before query", lineno)
                cur.expected = verdict
                continue
            is_query = line.startswith("query")
            if is_query:
                line = line[len("query"):].strip()
                if have_query:
                    raise FormatError("second query in one instance", lineno)
            try:
                ids = [int(t) for t in line.split()] if line else []
            except ValueError:
                raise FormatError(f"bad restriction line {line!r}", lineno) from None
            for i in ids:
                if i < 0 or i >= cur.num_leaves:
                    raise FormatError(f"leaf id {i} out of range", lineno)
            if len(set(ids)) != len(ids):
                raise FormatError("duplicate leaf id in restriction", lineno)
            if is_query:
                cur.query_restriction = ids
                have_query = True
            else:
                if have_query:
                    raise FormatError("restriction after query", lineno)
                cur.build_restrictions.append(ids)
    if cur is None:
        raise FormatError("no instances found", 1)
    if not have_query:
        raise FormatError("instance without query line", lineno)
    return instances


def write_instances(path, instances) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for inst in instances:
            fh.write(f"n={inst.num_leaves}\n")
            for r in inst.build_restrictions:
                fh.write(" ".join(str(i) for i in r) + "\n")
            fh.write("query " + " ".join(str(i) for i in inst.query_restriction) + "\n")
            if inst.expected in ("possible", "impossible"):
                fh.write(f"expect {inst.expected}\n")


def rebuild_tree(instance: Instance) -> PCTree:
    """Replay the build restrictions on a fresh star."""
    tree = PCTree(instance.num_leaves)
    leaves = tree.leaves
    for r in instance.build_restrictions:
        out = tree.make_consecutive([leaves[i] for i in r])
        if not out.possible:
            raise FormatError("build restriction is impossible", 0)
    return tree


def tree_restrictions(tree: PCTree) -> list[list[int]]:
    """Restrictions (as leaf-id lists) that rebuild this tree from a star.

    Every inner edge contributes its subtree's leaf set; each C-node
    additionally pins its cyclic child order through adjacent-pair
    unions.  Replaying them on a star yields a tree with the same order
    set.
    """
    leaf_id = {h: i for i, h in enumerate(tree.leaves)}
    nodes = tree._nodes
    out: list[list[int]] = []
    if tree.root == NO_NODE or nodes[tree.root].kind == LEAF:
        return out

    subtree: dict[int, list[int]] = {}

    def collect(h: int) -> list[int]:
        if nodes[h].kind == LEAF:
            res = [leaf_id[h]]
        else:
            res = []
            for c in tree.children_of(h):
                res.extend(collect(c))
        subtree[h] = res
        return res

    collect(tree.root)

    def emit(h: int) -> None:
        node = nodes[h]
        if node.kind == LEAF:
            return
        kids = tree.children_of(h)
        if h != tree.root and len(subtree[h]) < tree.num_leaves - 1:
            out.append(sorted(subtree[h]))
        if node.kind == C_NODE:
            ring = list(kids)
            if h != tree.root:
                # the parent edge closes the cycle; pin pairs around it too
                pairs = list(zip(ring, ring[1:]))
            else:
                pairs = list(zip(ring, ring[1:] + ring[:1]))
            for a, b in pairs:
                r = sorted(subtree[a] + subtree[b])
                if 1 < len(r) < tree.num_leaves - 1:
                    out.append(r)
        for c in kids:
            emit(c)

    emit(tree.root)
    return out


# ---------------------------------------------------------------------------
# result CSV
# ---------------------------------------------------------------------------


def write_results_csv(path, rows) -> None:
    """Rows are (instance, tree_size, restriction_size, tp_length|None,
    time_ns, result) tuples or equivalent iterables."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_CSV_HEADER)
        for row in rows:
            inst, tree_size, rsize, tp, time_ns, result = row
            writer.writerow([inst, tree_size, rsize,
                             "" if tp is None else tp, time_ns, result])
