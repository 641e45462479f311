"""Arena-based PC-tree with Union-Find identity for C-nodes.

A PC-tree is a tree without degree-2 inner nodes whose leaves carry a set
of circular orders: children of P-nodes may be permuted arbitrarily, the
cyclic order around a C-node is fixed up to reversal.

Representation notes
--------------------
* Nodes live in a growable arena and are addressed by integer handles.
  Handles are stable for the lifetime of the tree; detached nodes are
  marked dead and never reused.
* Every node stores five links: a parent link, two sibling links and
  first/last child.  Sibling links are an *unordered* pair, so reversing
  the child list of a C-node is free; traversals carry the predecessor to
  orient themselves.
* Children of a C-node do not point at the C-node object directly.  They
  hold a cell id in a Union-Find forest whose root maps to the current
  representative node.  Merging two C-nodes is then a single ``union``
  plus O(1) pointer surgery, no matter how many children are involved.
* Per-restriction scratch data (labels, full-neighbor counts) is guarded
  by a generation stamp.  Bumping the stamp invalidates all scratch in
  O(1); no cleanup traversal ever runs.

A tree is single-owner: no operation, including reads, may run
concurrently with another operation on the same tree (queries compress
Union-Find paths).  Distinct trees are independent.
"""

from __future__ import annotations

# node kinds
LEAF = 0
P_NODE = 1
C_NODE = 2

# restriction labels
EMPTY = 0
PARTIAL = 1
FULL = 2

NO_NODE = -1
# Ring-position token for the edge toward the parent.
PARENT_EDGE = -2

KIND_NAMES = {LEAF: "leaf", P_NODE: "P", C_NODE: "C"}
LABEL_NAMES = {EMPTY: "empty", PARTIAL: "partial", FULL: "full"}


class PCTreeError(Exception):
    """Base class for all errors raised by this package."""


class UnknownLeafError(PCTreeError):
    """A restriction referenced a handle that is not a live leaf."""


class NoPendingRestrictionError(PCTreeError):
    """replace_leaves was called without a preceding successful restriction."""


class InvalidCountError(PCTreeError):
    """replace_leaves needs a positive leaf count."""


class UnionFind:
    """Disjoint-set forest with union by size and path compression.

    Each cell carries a payload (a node handle).  ``union`` lets the
    caller decide which payload survives, independent of which root wins
    internally.  ``find_steps`` counts parent-link traversals and exists
    purely for instrumentation.
    """

    __slots__ = ("parent", "size", "payload", "find_steps")

    def __init__(self) -> None:
        self.parent: list[int] = []
        self.size: list[int] = []
        self.payload: list[int] = []
        self.find_steps = 0

    def make_set(self, payload: int = NO_NODE) -> int:
        cid = len(self.parent)
        self.parent.append(cid)
        self.size.append(1)
        self.payload.append(payload)
        return cid

    def find(self, cid: int) -> int:
        parent = self.parent
        root = cid
        steps = 0
        while parent[root] != root:
            root = parent[root]
            steps += 1
        while parent[cid] != root:
            parent[cid], cid = root, parent[cid]
        self.find_steps += steps
        return root

    def union(self, a: int, b: int, surviving_payload: int = NO_NODE) -> int:
        """Merge the sets of ``a`` and ``b``; the merged payload is chosen
        by the caller, not by which internal root happens to win."""
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if self.size[ra] < self.size[rb]:
                ra, rb = rb, ra
            self.parent[rb] = ra
            self.size[ra] += self.size[rb]
        self.payload[ra] = surviving_payload
        return ra


class PCNode:
    """One arena slot.  Fields are only meaningful for live nodes.

    ``label``, ``full_count``, ``full_neighbors`` are valid only while
    ``stamp`` equals the tree's current stamp; the terminal-path scratch
    (``tp_*``) is guarded by ``tp_stamp`` the same way.
    """

    __slots__ = (
        "kind", "parent", "parent_cell", "sib1", "sib2",
        "first_child", "last_child", "child_count", "cell", "dead",
        "stamp", "label", "full_count", "full_neighbors",
        "tp_stamp", "tp_arrivals", "tp_allowed", "tp_hp", "tp_up", "tp_killed",
    )

    def __init__(self, kind: int) -> None:
        self.kind = kind
        self.parent = NO_NODE
        self.parent_cell = NO_NODE
        self.sib1 = NO_NODE
        self.sib2 = NO_NODE
        self.first_child = NO_NODE
        self.last_child = NO_NODE
        self.child_count = 0
        self.cell = NO_NODE          # Union-Find cell (C-nodes only)
        self.dead = False
        self.stamp = 0
        self.label = EMPTY
        self.full_count = 0
        self.full_neighbors: list[int] = []
        self.tp_stamp = 0
        self.tp_arrivals: list[int] = []
        self.tp_allowed: tuple[int, int] | None = None
        self.tp_hp = NO_NODE
        self.tp_up = NO_NODE
        self.tp_killed = False


class PCTree:
    """A PC-tree over ``num_leaves`` leaves.

    A fresh tree is a star (single P-node root), which represents every
    circular order of the leaf set.  Trees with fewer than three leaves
    have no inner node at all: 0 or 1 leaves are isolated, 2 leaves form
    a single edge rooted at one of the two leaves.
    """

    def __init__(self, num_leaves: int) -> None:
        if num_leaves < 0:
            raise ValueError("leaf count must be non-negative")
        self._nodes: list[PCNode] = []
        self._uf = UnionFind()
        self._stamp = 1
        self._leaf_set: set[int] = set()
        self._num_leaves = 0
        self.root = NO_NODE
        self._pending_restriction: tuple[int, ...] | None = None
        self.last_replace_wrapped = False
        self._init_star(num_leaves)

    def _init_star(self, num_leaves: int) -> None:
        leaves = [self._new_node(LEAF) for _ in range(num_leaves)]
        self._leaf_set.update(leaves)
        self._num_leaves += num_leaves
        if num_leaves == 0:
            return
        if num_leaves == 1:
            self.root = leaves[0]
            return
        if num_leaves == 2:
            a, b = leaves
            self.root = a
            set_child_ring(self, a, [b])
            self._nodes[b].parent = a
            return
        root = self._new_node(P_NODE)
        self.root = root
        set_child_ring(self, root, leaves)
        for h in leaves:
            self._nodes[h].parent = root

    # -- construction helpers -------------------------------------------

    def _new_node(self, kind: int) -> int:
        h = len(self._nodes)
        node = PCNode(kind)
        if kind == C_NODE:
            node.cell = self._uf.make_set(h)
        self._nodes.append(node)
        return h

    def node(self, h: int) -> PCNode:
        return self._nodes[h]

    # -- basic queries ---------------------------------------------------

    @property
    def leaves(self) -> list[int]:
        """Live leaf handles in creation order."""
        return sorted(self._leaf_set)

    @property
    def num_leaves(self) -> int:
        return self._num_leaves

    @property
    def uf(self) -> UnionFind:
        return self._uf

    @property
    def current_stamp(self) -> int:
        return self._stamp

    def is_live_leaf(self, h: int) -> bool:
        return (
            isinstance(h, int)
            and 0 <= h < len(self._nodes)
            and h in self._leaf_set
            and not self._nodes[h].dead
        )

    def parent_of(self, h: int) -> int:
        """Current parent handle, resolving Union-Find; NO_NODE for the root."""
        node = self._nodes[h]
        if node.parent_cell != NO_NODE:
            return self._uf.payload[self._uf.find(node.parent_cell)]
        return node.parent

    def children_of(self, h: int) -> list[int]:
        """Children in stored list order (walks the sibling chain)."""
        nodes = self._nodes
        out: list[int] = []
        prev = NO_NODE
        cur = nodes[h].first_child
        while cur != NO_NODE:
            out.append(cur)
            n = nodes[cur]
            nxt = n.sib1 if n.sib1 != prev else n.sib2
            prev, cur = cur, nxt
        return out

    def neighbors_of(self, h: int) -> list[int]:
        """Children in list order, then the parent if there is one.

        Read cyclically (the parent wrapping around to the first child)
        this is the stored rotation of the node's neighbors; for a C-node
        that cyclic order is fixed up to reversal.
        """
        out = self.children_of(h)
        p = self.parent_of(h)
        if p != NO_NODE:
            out.append(p)
        return out

    def degree_of(self, h: int) -> int:
        node = self._nodes[h]
        return node.child_count + (1 if self.parent_of(h) != NO_NODE else 0)

    def label_of(self, h: int) -> int:
        """Stamped label read; stale scratch reads as EMPTY."""
        node = self._nodes[h]
        return node.label if node.stamp == self._stamp else EMPTY

    def full_neighbor_count_of(self, h: int) -> int:
        node = self._nodes[h]
        return node.full_count if node.stamp == self._stamp else 0

    def bump_stamp(self) -> int:
        self._stamp += 1
        return self._stamp

    def current_order(self) -> list[int]:
        """One valid circular order of the leaves (depth-first, honoring
        the stored child orders)."""
        if self.root == NO_NODE:
            return []
        nodes = self._nodes
        out: list[int] = []
        stack = [self.root]
        while stack:
            h = stack.pop()
            if nodes[h].kind == LEAF:
                out.append(h)
            if nodes[h].first_child != NO_NODE:
                stack.extend(reversed(self.children_of(h)))
        return out

    # -- restriction API (implemented in restrict.py) ---------------------

    def make_consecutive(self, leaves):
        from . import restrict
        return restrict.make_consecutive(self, leaves)

    def replace_leaves(self, k: int) -> list[int]:
        from . import restrict
        return restrict.replace_leaves(self, k)

    def clone(self) -> "PCTree":
        """Structural deep copy (scratch fields are not carried over)."""
        other = PCTree.__new__(PCTree)
        other._nodes = []
        for node in self._nodes:
            twin = PCNode(node.kind)
            twin.parent = node.parent
            twin.parent_cell = node.parent_cell
            twin.sib1 = node.sib1
            twin.sib2 = node.sib2
            twin.first_child = node.first_child
            twin.last_child = node.last_child
            twin.child_count = node.child_count
            twin.cell = node.cell
            twin.dead = node.dead
            other._nodes.append(twin)
        uf = UnionFind()
        uf.parent = list(self._uf.parent)
        uf.size = list(self._uf.size)
        uf.payload = list(self._uf.payload)
        other._uf = uf
        other._stamp = 1
        other._leaf_set = set(self._leaf_set)
        other._num_leaves = self._num_leaves
        other.root = self.root
        other._pending_restriction = self._pending_restriction
        other.last_replace_wrapped = False
        return other


# ---------------------------------------------------------------------------
# Child-ring surgery.
#
# The children of a node form a doubly linked list (first_child .. last_child)
# with unordered sibling pairs.  Read cyclically, the ring of a non-root node
# is the child list with the parent edge between last and first child; for the
# root the list wraps around directly.
# ---------------------------------------------------------------------------


def sib_replace(node: PCNode, old: int, new: int) -> None:
    if node.sib1 == old:
        node.sib1 = new
    elif node.sib2 == old:
        node.sib2 = new
    else:
        raise AssertionError("sibling link not found")


def set_child_ring(tree: PCTree, parent: int, ring: list[int]) -> None:
    """Install ``ring`` as the child list of ``parent``.

    ``ring`` is a cyclic neighbor sequence that may contain one
    PARENT_EDGE token; the list is rotated so that token lands on the
    wrap position between last and first child.  Parent links of the
    children are not touched.
    """
    nodes = tree._nodes
    if PARENT_EDGE in ring:
        i = ring.index(PARENT_EDGE)
        ring = ring[i + 1:] + ring[:i]
    pnode = nodes[parent]
    pnode.child_count = len(ring)
    if not ring:
        pnode.first_child = pnode.last_child = NO_NODE
        return
    pnode.first_child = ring[0]
    pnode.last_child = ring[-1]
    last = len(ring) - 1
    for i, h in enumerate(ring):
        n = nodes[h]
        n.sib1 = ring[i - 1] if i > 0 else NO_NODE
        n.sib2 = ring[i + 1] if i < last else NO_NODE


def is_ring_root(tree: PCTree, owner: int) -> bool:
    node = tree._nodes[owner]
    return node.parent == NO_NODE and node.parent_cell == NO_NODE


def ring_tokens(tree: PCTree, owner: int, child: int) -> tuple[int, int]:
    """The two cyclic ring neighbors of ``child`` around ``owner``.

    Tokens are child handles or PARENT_EDGE.  ``owner`` must be the
    representative node when it is a merged C-node.  For the root the
    ring wraps from last child to first child directly.
    """
    nodes = tree._nodes
    n = nodes[child]
    wrap = is_ring_root(tree, owner)
    pnode = nodes[owner]
    out = []
    for s in (n.sib1, n.sib2):
        if s != NO_NODE:
            out.append(s)
        elif not wrap:
            out.append(PARENT_EDGE)
        elif pnode.first_child == pnode.last_child:
            out.append(PARENT_EDGE)  # degenerate single-child ring
        else:
            out.append(pnode.last_child if child == pnode.first_child
                       else pnode.first_child)
    return out[0], out[1]


def detach_child(tree: PCTree, parent: int, child: int) -> None:
    """Remove ``child`` from ``parent``'s ring in O(1).  The child's own
    links are left cleared; callers relink or kill it."""
    nodes = tree._nodes
    n = nodes[child]
    s1, s2 = n.sib1, n.sib2
    pnode = nodes[parent]
    if s1 != NO_NODE and s2 != NO_NODE:
        sib_replace(nodes[s1], child, s2)
        sib_replace(nodes[s2], child, s1)
    elif s1 != NO_NODE or s2 != NO_NODE:
        s = s1 if s1 != NO_NODE else s2
        sib_replace(nodes[s], child, NO_NODE)
        if pnode.first_child == child:
            pnode.first_child = s
        if pnode.last_child == child:
            pnode.last_child = s
    else:
        pnode.first_child = pnode.last_child = NO_NODE
    pnode.child_count -= 1
    n.sib1 = n.sib2 = NO_NODE


def append_child(tree: PCTree, parent: int, child: int) -> None:
    """Insert ``child`` at the wrap position (between last and first)."""
    nodes = tree._nodes
    pnode = nodes[parent]
    n = nodes[child]
    if pnode.last_child == NO_NODE:
        pnode.first_child = pnode.last_child = child
        n.sib1 = n.sib2 = NO_NODE
    else:
        sib_replace(nodes[pnode.last_child], NO_NODE, child)
        n.sib1 = pnode.last_child
        n.sib2 = NO_NODE
        pnode.last_child = child
    pnode.child_count += 1


def splice_slot(tree: PCTree, parent: int, old: int,
                chain: list[int], first_faces: int) -> None:
    """Replace ``old``'s ring slot by ``chain`` (links are rebuilt here).

    ``first_faces`` names the ring neighbor that ``chain[0]`` must become
    adjacent to: a sibling handle, PARENT_EDGE for the slot beside the
    parent edge, or (root rings only) the wrap neighbor's handle.
    ``old`` itself may appear inside ``chain``.
    """
    nodes = tree._nodes
    pnode = nodes[parent]
    onode = nodes[old]
    s1, s2 = onode.sib1, onode.sib2
    was_first = pnode.first_child == old
    was_last = pnode.last_child == old

    # Describe old's two ring sides before touching anything.
    def side_desc(sib: int, prefer_first: bool):
        if sib != NO_NODE:
            return ("node", sib)
        if was_first and was_last:
            return ("first",) if prefer_first else ("last",)
        if was_first:
            return ("first",)
        if was_last:
            return ("last",)
        raise AssertionError("interior node with missing sibling")

    desc1 = side_desc(s1, True)
    desc2 = side_desc(s2, False)

    if first_faces >= 0 and first_faces == s1:
        a_desc, b_desc = desc1, desc2
    elif first_faces >= 0 and first_faces == s2:
        a_desc, b_desc = desc2, desc1
    elif desc1[0] != "node":
        a_desc, b_desc = desc1, desc2
    elif desc2[0] != "node":
        a_desc, b_desc = desc2, desc1
    else:
        raise AssertionError("orientation token matches no ring side")

    # Relink the chain internally (may rewrite old's sibs; that is fine,
    # the sides were snapshotted above).
    last = len(chain) - 1
    for i, h in enumerate(chain):
        n = nodes[h]
        n.sib1 = chain[i - 1] if i > 0 else NO_NODE
        n.sib2 = chain[i + 1] if i < last else NO_NODE

    for desc, end in ((a_desc, chain[0]), (b_desc, chain[-1])):
        if desc[0] == "node":
            sib_replace(nodes[desc[1]], old, end)
            sib_replace(nodes[end], NO_NODE, desc[1])
        elif desc[0] == "first":
            pnode.first_child = end
        else:
            pnode.last_child = end
    pnode.child_count += len(chain) - 1


def splice_linked(tree: PCTree, parent: int, old: int,
                  end_a: int, end_b: int, count: int, a_faces: int) -> None:
    """Replace ``old``'s ring slot by a pre-linked chain of ``count``
    children with outer ends ``end_a``/``end_b`` (outer sib slots must be
    NO_NODE).  ``end_a`` becomes adjacent to ``a_faces`` (same token rules
    as splice_slot).  Used to merge a C-node's whole child list in O(1).
    """
    nodes = tree._nodes
    pnode = nodes[parent]
    onode = nodes[old]
    s1, s2 = onode.sib1, onode.sib2
    was_first = pnode.first_child == old
    was_last = pnode.last_child == old

    def side_desc(sib: int, prefer_first: bool):
        if sib != NO_NODE:
            return ("node", sib)
        if was_first and was_last:
            return ("first",) if prefer_first else ("last",)
        if was_first:
            return ("first",)
        if was_last:
            return ("last",)
        raise AssertionError("interior node with missing sibling")

    desc1 = side_desc(s1, True)
    desc2 = side_desc(s2, False)
    if a_faces >= 0 and a_faces == s1:
        a_desc, b_desc = desc1, desc2
    elif a_faces >= 0 and a_faces == s2:
        a_desc, b_desc = desc2, desc1
    elif desc1[0] != "node":
        a_desc, b_desc = desc1, desc2
    elif desc2[0] != "node":
        a_desc, b_desc = desc2, desc1
    else:
        raise AssertionError("orientation token matches no ring side")

    for desc, end in ((a_desc, end_a), (b_desc, end_b)):
        if desc[0] == "node":
            sib_replace(nodes[desc[1]], old, end)
            sib_replace(nodes[end], NO_NODE, desc[1])
        elif desc[0] == "first":
            pnode.first_child = end
        else:
            pnode.last_child = end
    pnode.child_count += count - 1
    onode.sib1 = onode.sib2 = NO_NODE


def replace_in_parent(tree: PCTree, old: int, new: int) -> None:
    """Make ``new`` occupy ``old``'s position in the parent ring, copying
    the parent link verbatim.  ``old`` must currently be linked."""
    nodes = tree._nodes
    onode = nodes[old]
    nnode = nodes[new]
    if onode.parent_cell != NO_NODE:
        rep = tree._uf.payload[tree._uf.find(onode.parent_cell)]
        nnode.parent_cell = onode.parent_cell
        nnode.parent = NO_NODE
    else:
        nnode.parent = onode.parent
        nnode.parent_cell = NO_NODE
        rep = onode.parent
    if rep == NO_NODE:
        tree.root = new
        nnode.parent = NO_NODE
        nnode.parent_cell = NO_NODE
        onode.sib1 = onode.sib2 = NO_NODE
        return
    pnode = nodes[rep]
    s1, s2 = onode.sib1, onode.sib2
    if s1 != NO_NODE:
        sib_replace(nodes[s1], old, new)
    if s2 != NO_NODE:
        sib_replace(nodes[s2], old, new)
    nnode.sib1, nnode.sib2 = s1, s2
    if pnode.first_child == old:
        pnode.first_child = new
    if pnode.last_child == old:
        pnode.last_child = new
    onode.sib1 = onode.sib2 = NO_NODE


def set_parent_link(tree: PCTree, child: int, parent: int) -> None:
    """Point ``child``'s parent link at ``parent`` (cell id for C-nodes)."""
    n = tree._nodes[child]
    p = tree._nodes[parent]
    if p.kind == C_NODE:
        n.parent_cell = p.cell
        n.parent = NO_NODE
    else:
        n.parent = parent
        n.parent_cell = NO_NODE


def kill_node(tree: PCTree, h: int) -> None:
    node = tree._nodes[h]
    node.dead = True
    node.sib1 = node.sib2 = NO_NODE
    node.first_child = node.last_child = NO_NODE
    node.parent = node.parent_cell = NO_NODE


def contract_degree2(tree: PCTree, h: int) -> None:
    """Remove an inner node with exactly two neighbors, joining them.

    Handles both the interior case (one child, one parent) and a root
    with two children.  Leaves are never contracted.
    """
    nodes = tree._nodes
    node = nodes[h]
    if node.kind == LEAF or node.dead:
        return
    parent = tree.parent_of(h)
    if parent != NO_NODE:
        if node.child_count != 1:
            raise AssertionError("contract_degree2 on node with degree != 2")
        child = node.first_child
        replace_in_parent(tree, h, child)
        kill_node(tree, h)
        return
    # root with two children
    if node.child_count != 2:
        raise AssertionError("contract_degree2 on root with degree != 2")
    a, b = nodes[h].first_child, nodes[h].last_child
    # prefer an inner node as the new root
    if nodes[a].kind == LEAF and nodes[b].kind != LEAF:
        a, b = b, a
    nodes[a].parent = NO_NODE
    nodes[a].parent_cell = NO_NODE
    nodes[a].sib1 = nodes[a].sib2 = NO_NODE
    nodes[b].sib1 = nodes[b].sib2 = NO_NODE
    tree.root = a
    kill_node(tree, h)
    append_child(tree, a, b)
    set_parent_link(tree, b, a)


def validate_structure(tree: PCTree) -> None:
    """Full-traversal structural check; raises AssertionError on any
    violated invariant.  Meant for tests and the self-test harness."""
    nodes = tree._nodes
    if tree.root == NO_NODE:
        assert tree.num_leaves == 0
        return
    assert not nodes[tree.root].dead
    seen: set[int] = set()
    leaf_count = 0
    stack = [tree.root]
    while stack:
        h = stack.pop()
        assert h not in seen, "cycle detected"
        seen.add(h)
        node = nodes[h]
        assert not node.dead, f"dead node {h} reachable"
        kids = tree.children_of(h)
        assert len(kids) == node.child_count, \
            f"child_count mismatch at {h}: {len(kids)} != {node.child_count}"
        if kids:
            assert nodes[node.first_child].sib1 == NO_NODE or \
                nodes[node.first_child].sib2 == NO_NODE
            assert node.last_child == kids[-1]
        if node.kind == LEAF:
            leaf_count += 1
            assert h in tree._leaf_set
            if h != tree.root:
                assert node.child_count == 0
            else:
                assert node.child_count <= 1  # 2-leaf degenerate
        else:
            deg = tree.degree_of(h)
            if h == tree.root:
                assert deg >= 3, f"inner root {h} has degree {deg}"
            else:
                assert deg >= 3, f"inner node {h} has degree {deg}"
        for c in kids:
            assert tree.parent_of(c) == h, f"parent link broken at {c}"
            # sibling symmetry
            cn = nodes[c]
            for s in (cn.sib1, cn.sib2):
                if s != NO_NODE:
                    assert nodes[s].sib1 == c or nodes[s].sib2 == c
            stack.append(c)
    assert leaf_count == tree.num_leaves, \
        f"leaf count {leaf_count} != recorded {tree.num_leaves}"
    assert len(tree._leaf_set) == tree.num_leaves
