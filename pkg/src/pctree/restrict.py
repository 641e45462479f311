"""The restriction update: make a leaf subset circularly consecutive.

The update runs in four stages on top of :mod:`pctree.core`:

1. label full and partial nodes bottom-up from the full leaves,
2. find the terminal path by ascending from all partial nodes in
   parallel,
3. validate the path (this is where impossible restrictions surface),
4. restructure: create or reuse a central C-node at the apex and fold
   the path into it, merging C-nodes through Union-Find and splitting
   P-nodes into their full and empty halves.

No structure is touched before stage 4, so a failed restriction leaves
the tree bit-identical (scratch stamps aside).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .core import (
    C_NODE, EMPTY, FULL, LEAF, NO_NODE, PARENT_EDGE, PARTIAL, P_NODE,
    InvalidCountError, NoPendingRestrictionError, PCTree, UnknownLeafError,
    append_child, contract_degree2, detach_child, kill_node,
    replace_in_parent, ring_tokens, set_child_ring, set_parent_link,
    sib_replace, splice_linked, splice_slot,
)

I_SHAPED = "I"
A_SHAPED = "A"


class _Impossible(Exception):
    """Internal signal: the restriction cannot be satisfied."""


@dataclass
class RestrictionStats:
    """Instrumentation counters for one make_consecutive call.

    ``label_steps`` covers the labeling queue plus C-node full-block
    walks (both are bounded by the restriction size); ``path_steps``
    covers the terminal-path queue, backtracking and path assembly.
    """
    nodes_labeled: int = 0
    label_steps: int = 0
    path_steps: int = 0


@dataclass
class TerminalPath:
    """The validated terminal path t1 .. apex .. t2."""
    nodes: list[int]
    apex: int
    apex_index: int
    shape: str
    length: int  # edge count


@dataclass
class RestrictionOutcome:
    possible: bool
    terminal_path_length: int | None
    stats: RestrictionStats = field(default_factory=RestrictionStats)


# ---------------------------------------------------------------------------
# stage 1: labeling
# ---------------------------------------------------------------------------


def _touch(node, stamp: int) -> None:
    if node.stamp != stamp:
        node.stamp = stamp
        node.label = EMPTY
        node.full_count = 0
        node.full_neighbors = []


def _lab(node, stamp: int) -> int:
    return node.label if node.stamp == stamp else EMPTY


def label_nodes(tree: PCTree, full_leaves, stats: RestrictionStats | None = None) -> list[int]:
    """Label every full and partial node reachable bottom-up from the
    full leaves; returns the nodes whose final label is partial.

    The tree's stamp must have been bumped for this restriction.  Work is
    linear in the number of full leaves: every full node is dequeued once
    and its single non-full neighbor is found either through the parent
    link or by one scan of its children.
    """
    stamp = tree._stamp
    nodes = tree._nodes
    if stats is None:
        stats = RestrictionStats()
    partials: list[int] = []
    queue: deque[int] = deque()
    for h in full_leaves:
        n = nodes[h]
        _touch(n, stamp)
        n.label = FULL
        queue.append(h)
    steps = len(queue)
    labeled = len(queue)
    while queue:
        x = queue.popleft()
        steps += 1
        xn = nodes[x]
        p = tree.parent_of(x)
        z = NO_NODE
        if p != NO_NODE and _lab(nodes[p], stamp) != FULL:
            z = p
        else:
            # the parent became full first (or x is the root): the single
            # non-full neighbor is among the children
            prev = NO_NODE
            cur = xn.first_child
            while cur != NO_NODE:
                steps += 1
                cn = nodes[cur]
                if _lab(cn, stamp) != FULL:
                    z = cur
                    break
                prev, cur = cur, (cn.sib1 if cn.sib1 != prev else cn.sib2)
        if z == NO_NODE:
            continue  # every neighbor full: only happens when R covers all leaves
        zn = nodes[z]
        if zn.kind == LEAF:
            continue
        _touch(zn, stamp)
        if zn.full_count == 0:
            zn.label = PARTIAL
            partials.append(z)
            labeled += 1
        zn.full_count += 1
        zn.full_neighbors.append(x)
        deg = zn.child_count + (1 if tree.parent_of(z) != NO_NODE else 0)
        if zn.full_count == deg - 1:
            zn.label = FULL
            queue.append(z)
    stats.label_steps += steps
    stats.nodes_labeled += labeled
    return [h for h in partials if nodes[h].label == PARTIAL]


# ---------------------------------------------------------------------------
# stage 2/3: terminal path
# ---------------------------------------------------------------------------


def _tp_touch(node, stamp: int) -> None:
    if node.tp_stamp != stamp:
        node.tp_stamp = stamp
        node.tp_arrivals = []
        node.tp_allowed = None
        node.tp_hp = NO_NODE
        node.tp_up = NO_NODE
        node.tp_killed = False


def _ring_step(tree: PCTree, owner: int, tok: int, prev: int) -> int:
    if tok == PARENT_EDGE:
        n = tree._nodes[owner]
        a, b = n.last_child, n.first_child
    else:
        a, b = ring_tokens(tree, owner, tok)
    return a if a != prev else b


def _token_full(tree: PCTree, owner: int, tok: int, parent: int, stamp: int) -> bool:
    h = parent if tok == PARENT_EDGE else tok
    return h != NO_NODE and _lab(tree._nodes[h], stamp) == FULL


def _full_block_hug(tree: PCTree, x: int, stats: RestrictionStats) -> tuple[int, int]:
    """For a partial C-node, walk its block of full neighbors and return
    the two non-full ring positions hugging it.  Raises _Impossible when
    the full neighbors are not contiguous around the node.

    The walk is linear in the node's full-neighbor count and is charged
    against the restriction size.
    """
    nodes = tree._nodes
    stamp = tree._stamp
    xn = nodes[x]
    p = tree.parent_of(x)
    f0 = xn.full_neighbors[0]
    t0 = PARENT_EDGE if f0 == p else f0
    if t0 == PARENT_EDGE:
        a = xn.last_child
        b = xn.first_child
    else:
        a, b = ring_tokens(tree, x, t0)
    count = 1
    steps = 2
    ends = []
    for start in (a, b):
        prev, cur = t0, start
        while _token_full(tree, x, cur, p, stamp):
            count += 1
            steps += 1
            if count > xn.full_count:
                raise _Impossible  # walked into a second block
            prev, cur = cur, _ring_step(tree, x, cur, prev)
        ends.append(cur)
    stats.label_steps += steps
    if count != xn.full_count:
        raise _Impossible  # detached full neighbors elsewhere on the ring
    return ends[0], ends[1]


def find_terminal_path(tree: PCTree, partials: list[int],
                       stats: RestrictionStats | None = None) -> TerminalPath | None:
    """Locate the terminal path given the partial nodes of the current
    restriction.  Returns None when the restriction is impossible.

    All partial nodes ascend in FIFO lockstep.  A front stops at the
    root, below a full node, or at a C-node whose parent edge does not
    hug its full block; two fronts meeting fixes the apex.  When a single
    front is left and no apex is known, everything has merged into one
    ascending chain and the apex is recovered from the highest-partial
    record kept on every empty node of the chain.
    """
    if stats is None:
        stats = RestrictionStats()
    stamp = tree._stamp
    nodes = tree._nodes
    try:
        return _find_terminal_path(tree, partials, stats, stamp, nodes)
    except _Impossible:
        return None


def _find_terminal_path(tree, partials, stats, stamp, nodes):
    queue: deque[int] = deque()
    seeds = len(partials)
    comps = seeds
    candidates: list[int] = []
    apex_fixed = NO_NODE
    steps = 0

    if seeds == 0:
        raise _Impossible  # nontrivial restrictions always produce partials

    for h in partials:
        n = nodes[h]
        _tp_touch(n, stamp)
        if n.kind == C_NODE:
            n.tp_allowed = _full_block_hug(tree, h, stats)
        queue.append(h)
        steps += 1

    apex = NO_NODE
    while queue:
        if len(queue) == 1 and not candidates and apex_fixed == NO_NODE:
            # lone ascending chain: everything merged already; backtrack
            # to the highest partial below the front
            x = queue[0]
            xn = nodes[x]
            apex = x if _lab(xn, stamp) == PARTIAL else xn.tp_hp
            break
        x = queue.popleft()
        steps += 1
        xn = nodes[x]
        if xn.tp_killed:
            continue
        p = tree.parent_of(x)
        if p == NO_NODE:
            candidates.append(x)
            continue
        if xn.kind == C_NODE and xn.tp_allowed is not None \
                and PARENT_EDGE not in xn.tp_allowed:
            candidates.append(x)
            continue
        pn = nodes[p]
        if _lab(pn, stamp) == FULL:
            candidates.append(x)
            continue
        # arrival of edge x at p
        xn.tp_up = p
        if pn.tp_stamp != stamp:
            _tp_touch(pn, stamp)
            pn.tp_hp = x if _lab(xn, stamp) == PARTIAL else xn.tp_hp
            if pn.kind == C_NODE:
                pn.tp_allowed = ring_tokens(tree, p, x)
            pn.tp_arrivals.append(x)
            queue.append(p)
        else:
            if len(pn.tp_arrivals) >= 2:
                raise _Impossible  # third terminal edge at one node
            if pn.kind == C_NODE:
                allowed = pn.tp_allowed
                if allowed is None or (x != allowed[0] and x != allowed[1]):
                    raise _Impossible  # edge not adjacent to the full block
            if pn.tp_arrivals:
                if apex_fixed != NO_NODE:
                    raise _Impossible  # two distinct meeting points
                apex_fixed = p
                # anything climbed above the apex is overshoot; kill those
                # fronts (a partial up there would be a disconnected piece)
                cur = pn.tp_up
                pn.tp_killed = True
                while cur != NO_NODE:
                    steps += 1
                    cn = nodes[cur]
                    if _lab(cn, stamp) == PARTIAL:
                        raise _Impossible
                    cn.tp_killed = True
                    cur = cn.tp_up
            pn.tp_arrivals.append(x)
            comps -= 1

    if apex == NO_NODE:
        if comps != 1:
            raise _Impossible  # terminal edges do not form one path
        if apex_fixed != NO_NODE:
            apex = apex_fixed
        else:
            assert len(candidates) == 1, "one component implies one summit"
            c = candidates[0]
            cn = nodes[c]
            apex = c if _lab(cn, stamp) == PARTIAL else cn.tp_hp
    assert apex != NO_NODE

    # assemble t1 .. apex .. t2 by walking arrival links downward
    arrivals = nodes[apex].tp_arrivals

    def walk_arm(start: int) -> list[int]:
        seq = []
        cur = start
        while True:
            seq.append(cur)
            arr = nodes[cur].tp_arrivals
            if len(arr) > 1:
                raise _Impossible  # branch below the apex
            if not arr:
                return seq
            cur = arr[0]

    if not arrivals:
        path = [apex]
    elif len(arrivals) == 1:
        path = list(reversed(walk_arm(arrivals[0]))) + [apex]
    else:
        path = list(reversed(walk_arm(arrivals[0]))) + [apex] + walk_arm(arrivals[1])
    steps += len(path)

    on_path = sum(1 for h in path if _lab(nodes[h], stamp) == PARTIAL)
    if on_path != seeds:
        raise _Impossible  # some partial node is not on the path
    if _lab(nodes[path[0]], stamp) != PARTIAL or _lab(nodes[path[-1]], stamp) != PARTIAL:
        raise _Impossible

    stats.path_steps += steps
    apex_index = path.index(apex)
    shape = I_SHAPED if (apex == path[0] or apex == path[-1]) else A_SHAPED
    return TerminalPath(path, apex, apex_index, shape, len(path) - 1)


# ---------------------------------------------------------------------------
# stage 4: restructuring
# ---------------------------------------------------------------------------


def _full_children(tree: PCTree, h: int, stamp: int) -> list[int]:
    """Stamped full neighbors of ``h`` that are children (the parent,
    full or not, is never in the result)."""
    n = tree._nodes[h]
    if n.stamp != stamp:
        return []
    p = tree.parent_of(h)
    return [f for f in n.full_neighbors if f != p]


def _make_full_element(tree: PCTree, fulls: list[int], stamp: int) -> int:
    """Wrap 2+ full children in a fresh P-node; a single child stands for
    itself.  The new node is labeled full so later orientation checks can
    treat it like any other full neighbor."""
    if not fulls:
        return NO_NODE
    if len(fulls) == 1:
        return fulls[0]
    fe = tree._new_node(P_NODE)
    set_child_ring(tree, fe, fulls)
    for f in fulls:
        set_parent_link(tree, f, fe)
    fen = tree._nodes[fe]
    _touch(fen, stamp)
    fen.label = FULL
    return fe


def _side_is_full(tree: PCTree, c: int, tok: int, other_arm: int,
                  parent_full: bool, stamp: int) -> bool:
    if tok == PARENT_EDGE:
        return parent_full
    if other_arm != NO_NODE and tok == other_arm:
        return True  # empty apex: the two arms face each other
    return _lab(tree._nodes[tok], stamp) == FULL


def _arm_sides(tree: PCTree, c: int, d: int, other_arm: int,
               parent_full: bool, stamp: int) -> tuple[int, int]:
    """Classify the two ring neighbors of arm head ``d`` into the side
    where full subtrees accumulate and the side where empty ones do."""
    ta, tb = ring_tokens(tree, c, d)
    fa = _side_is_full(tree, c, ta, other_arm, parent_full, stamp)
    fb = _side_is_full(tree, c, tb, other_arm, parent_full, stamp)
    assert fa != fb, "exactly one ring side of an arm head is full"
    return (ta, tb) if fa else (tb, ta)


def _contract_arm(tree: PCTree, c: int, arm: list[int],
                  full_tok: int, empty_tok: int, parent_full: bool, stamp: int) -> None:
    """Fold one arm of the terminal path into the central node.

    Invariant: when node ``arm[i]`` is contracted it is a child of ``c``
    whose ring neighbors are exactly ``full_tok`` and ``empty_tok``; its
    full children are spliced toward ``full_tok`` and its path child (the
    next arm entry) ends up hugged between the growing full and empty
    arcs, restoring the invariant.
    """
    nodes = tree._nodes
    for i, x in enumerate(arm):
        nxt = arm[i + 1] if i + 1 < len(arm) else NO_NODE
        xn = nodes[x]
        if xn.kind == C_NODE:
            q1, qk = xn.first_child, xn.last_child
            if xn.stamp == stamp and xn.full_count > 0:
                # partial: the block sits at one end of the child list
                if _lab(nodes[q1], stamp) == FULL:
                    end_a, end_b = q1, qk
                else:
                    assert _lab(nodes[qk], stamp) == FULL
                    end_a, end_b = qk, q1
            else:
                # empty: the path child sits at one end
                if q1 == nxt:
                    end_a, end_b = q1, qk
                else:
                    assert qk == nxt
                    end_a, end_b = qk, q1
            cnt = xn.child_count
            splice_linked(tree, c, x, end_a, end_b, cnt, full_tok)
            tree._uf.union(nodes[c].cell, xn.cell, c)
            xn.dead = True
            xn.first_child = xn.last_child = NO_NODE
            xn.parent = xn.parent_cell = NO_NODE
        else:  # P-node: split into full and empty halves
            fulls = _full_children(tree, x, stamp)
            for f in fulls:
                detach_child(tree, x, f)
            if nxt != NO_NODE:
                detach_child(tree, x, nxt)
            fe = _make_full_element(tree, fulls, stamp)
            remaining = xn.child_count
            chain: list[int] = []
            if fe != NO_NODE:
                chain.append(fe)
            if nxt != NO_NODE:
                chain.append(nxt)
            keep_x = False
            if remaining >= 2:
                chain.append(x)
                keep_x = True
            elif remaining == 1:
                chain.append(xn.first_child)
            assert chain, "path P-node reduced to nothing"
            splice_slot(tree, c, x, chain, full_tok)
            for h in chain:
                set_parent_link(tree, h, c)
            if not keep_x:
                kill_node(tree, x)
        if nxt == NO_NODE:
            break
        ta, tb = ring_tokens(tree, c, nxt)
        a_full = (ta == full_tok) or _side_is_full(tree, c, ta, NO_NODE, parent_full, stamp)
        b_full = (tb == full_tok) or _side_is_full(tree, c, tb, NO_NODE, parent_full, stamp)
        assert a_full != b_full
        full_tok, empty_tok = (ta, tb) if a_full else (tb, ta)


def apply_update(tree: PCTree, path: TerminalPath,
                 stats: RestrictionStats | None = None) -> None:
    """Restructure the tree along a validated terminal path so the full
    leaves of the current restriction become and stay consecutive."""
    nodes = tree._nodes
    stamp = tree._stamp
    ai = path.apex_index
    arm1 = list(reversed(path.nodes[:ai]))
    arm2 = path.nodes[ai + 1:]
    apex = path.apex
    apn = nodes[apex]
    d1 = arm1[0] if arm1 else NO_NODE
    d2 = arm2[0] if arm2 else NO_NODE

    fp = tree.parent_of(apex)
    parent_full = fp != NO_NODE and _lab(nodes[fp], stamp) == FULL

    apex_alive_p = NO_NODE
    if apn.kind == C_NODE:
        c = apex
        apex_has_fulls = parent_full or (apn.stamp == stamp and apn.full_count > 0)
    else:
        fulls = _full_children(tree, apex, stamp)
        apex_has_fulls = parent_full or bool(fulls)
        if d1 != NO_NODE:
            detach_child(tree, apex, d1)
        if d2 != NO_NODE:
            detach_child(tree, apex, d2)
        for f in fulls:
            detach_child(tree, apex, f)
        remaining = apn.child_count

        c = tree._new_node(C_NODE)
        if parent_full:
            # the apex splits toward a full parent: its full half is a
            # P-node that keeps the full children and inherits the parent
            # edge, so they may still permute with the rest of the full side
            ring = []
            if d1 != NO_NODE:
                ring.append(d1)
            ring.append(PARENT_EDGE)
            if d2 != NO_NODE:
                ring.append(d2)
            if remaining >= 2:
                ring.append(apex)
            elif remaining == 1:
                ring.append(apn.first_child)
            if fulls:
                upper = tree._new_node(P_NODE)
                set_child_ring(tree, upper, fulls + [c])
                for f in fulls:
                    set_parent_link(tree, f, upper)
                replace_in_parent(tree, apex, upper)
                set_parent_link(tree, c, upper)
            else:
                replace_in_parent(tree, apex, c)
            set_child_ring(tree, c, ring)
            for h in ring:
                if h != PARENT_EDGE:
                    set_parent_link(tree, h, c)
            if remaining < 2:
                kill_node(tree, apex)
        else:
            fe = _make_full_element(tree, fulls, stamp)
            ring = []
            if d1 != NO_NODE:
                ring.append(d1)
            if fe != NO_NODE:
                ring.append(fe)
            if d2 != NO_NODE:
                ring.append(d2)
            # the route to the root (if any) stays with the empty side
            if remaining == 0:
                if fp == NO_NODE:
                    set_child_ring(tree, c, ring)
                    for h in ring:
                        set_parent_link(tree, h, c)
                    tree.root = c
                    nodes[c].parent = nodes[c].parent_cell = NO_NODE
                else:
                    replace_in_parent(tree, apex, c)
                    set_child_ring(tree, c, ring)
                    for h in ring:
                        set_parent_link(tree, h, c)
                kill_node(tree, apex)
            else:
                set_child_ring(tree, c, ring)
                for h in ring:
                    set_parent_link(tree, h, c)
                append_child(tree, apex, c)
                set_parent_link(tree, c, apex)
                apex_alive_p = apex

    if arm1:
        # with no full side at the apex the two arms face each other
        other = d2 if not apex_has_fulls else NO_NODE
        full_tok, empty_tok = _arm_sides(tree, c, d1, other, parent_full, stamp)
        _contract_arm(tree, c, arm1, full_tok, empty_tok, parent_full, stamp)
    if arm2:
        full_tok, empty_tok = _arm_sides(tree, c, d2, NO_NODE, parent_full, stamp)
        _contract_arm(tree, c, arm2, full_tok, empty_tok, parent_full, stamp)

    # sweep transient degree-2 nodes created at the seam
    cn = nodes[c]
    if not cn.dead:
        deg = cn.child_count + (1 if tree.parent_of(c) != NO_NODE else 0)
        if deg == 2:
            contract_degree2(tree, c)
    if apex_alive_p != NO_NODE and not nodes[apex_alive_p].dead:
        an = nodes[apex_alive_p]
        deg = an.child_count + (1 if tree.parent_of(apex_alive_p) != NO_NODE else 0)
        if deg == 2:
            contract_degree2(tree, apex_alive_p)


# ---------------------------------------------------------------------------
# the public entry points
# ---------------------------------------------------------------------------


def make_consecutive(tree: PCTree, leaves) -> RestrictionOutcome:
    """Apply the restriction "these leaves are circularly consecutive".

    On success the tree afterwards represents exactly its previous orders
    in which the restriction holds.  On failure the tree is unchanged.
    Restrictions of size 0, 1, n-1 and n hold in every circular order and
    succeed without any work.
    """
    stats = RestrictionStats()
    fulls: list[int] = []
    seen: set[int] = set()
    for h in leaves:
        if not tree.is_live_leaf(h):
            raise UnknownLeafError(f"handle {h!r} is not a live leaf")
        if h not in seen:
            seen.add(h)
            fulls.append(h)
    n = tree.num_leaves
    r = len(fulls)
    if r <= 1 or r >= n - 1:
        tree._pending_restriction = tuple(fulls)
        return RestrictionOutcome(True, 0, stats)

    tree.bump_stamp()
    partials = label_nodes(tree, fulls, stats)
    path = find_terminal_path(tree, partials, stats)
    if path is None:
        return RestrictionOutcome(False, None, stats)
    apply_update(tree, path, stats)
    tree._pending_restriction = tuple(fulls)
    return RestrictionOutcome(True, path.length, stats)


def replace_leaves(tree: PCTree, k: int) -> list[int]:
    """Replace the consecutive block of the last successful restriction
    by ``k`` fresh leaves (one plain leaf, or a P-node carrying them).

    Returns the new leaf handles.  The leaf count changes from n to
    n - r + k where r is the size of the replaced restriction.
    """
    if k < 1:
        raise InvalidCountError("replacement needs at least one leaf")
    if tree._pending_restriction is None:
        raise NoPendingRestrictionError("no successful restriction to replace")
    old = list(tree._pending_restriction)
    tree._pending_restriction = None
    nodes = tree._nodes
    tree.last_replace_wrapped = False

    if len(old) == tree.num_leaves:
        # the whole ground set is replaced: start over with a fresh star
        for h in range(len(nodes)):
            if not nodes[h].dead:
                kill_node(tree, h)
        tree._leaf_set.clear()
        tree._num_leaves = 0
        tree.root = NO_NODE
        before = len(nodes)
        tree._init_star(k)
        return [h for h in range(before, len(nodes)) if nodes[h].kind == LEAF]

    if len(old) == 0:
        raise InvalidCountError("an empty restriction has no block to replace")

    if len(old) == tree.num_leaves - 1:
        # the survivor is a single leaf, so every arrangement of it with
        # the fresh block is valid: the result is a star
        survivor = (tree._leaf_set - set(old)).pop()
        for h in range(len(nodes)):
            if not nodes[h].dead and h != survivor:
                kill_node(tree, h)
        sn = nodes[survivor]
        sn.parent = sn.parent_cell = NO_NODE
        sn.sib1 = sn.sib2 = NO_NODE
        sn.first_child = sn.last_child = NO_NODE
        sn.child_count = 0
        tree._leaf_set = {survivor}
        tree._num_leaves = 1
        new_leaves = [tree._new_node(LEAF) for _ in range(k)]
        tree._leaf_set.update(new_leaves)
        tree._num_leaves += k
        if k == 1:
            tree.root = survivor
            set_child_ring(tree, survivor, new_leaves)
            nodes[new_leaves[0]].parent = survivor
        else:
            root = tree._new_node(P_NODE)
            tree.root = root
            set_child_ring(tree, root, new_leaves + [survivor])
            for h in new_leaves + [survivor]:
                tree._nodes[h].parent = root
        tree.last_replace_wrapped = False
        return new_leaves

    # Climb from the old leaves to the roots of the maximal all-full
    # subtrees.  Their parents (the anchors) are either a single node or,
    # when the consecutive block runs through somebody's parent edge, the
    # ancestor chain from that hub up to the tree root.
    cnt: dict[int, int] = {}
    allfull: set[int] = set(old)
    q = deque(old)
    while q:
        h = q.popleft()
        p = tree.parent_of(h)
        assert p != NO_NODE, "whole-tree replacement handled above"
        c = cnt.get(p, 0) + 1
        cnt[p] = c
        if c == nodes[p].child_count and nodes[p].kind != LEAF:
            assert tree.parent_of(p) != NO_NODE, "root cannot be all-full here"
            allfull.add(p)
            q.append(p)
    roots = [h for h in allfull if tree.parent_of(h) not in allfull]
    root_set = set(roots)
    anchors = {tree.parent_of(h) for h in roots}

    if k == 1:
        repl = tree._new_node(LEAF)
        new_leaves = [repl]
    else:
        repl = tree._new_node(P_NODE)
        new_leaves = [tree._new_node(LEAF) for _ in range(k)]
        set_child_ring(tree, repl, new_leaves)
        for h in new_leaves:
            set_parent_link(tree, h, repl)

    if len(anchors) == 1:
        anchor = next(iter(anchors))
        if nodes[anchor].kind == C_NODE:
            _replace_arc_in_cnode(tree, anchor, roots[0], root_set, repl)
        else:
            for r in roots:
                detach_child(tree, anchor, r)
            append_child(tree, anchor, repl)
        set_parent_link(tree, repl, anchor)
    else:
        # The block wraps through a hub node's parent edge: everything
        # outside the hub's subtree is replaced and the hub becomes the
        # new tree root, with the block sitting where its parent edge was.
        anchor_parents = {tree.parent_of(a) for a in anchors}
        hubs = [a for a in anchors if a not in anchor_parents]
        assert len(hubs) == 1, "anchors form an ancestor chain"
        hub = anchor = hubs[0]
        hn = nodes[hub]
        hub_roots = [h for h in roots if tree.parent_of(h) == hub]
        if hn.kind == C_NODE:
            # the full children hug the parent position at the list ends
            stripped = 0
            while hn.first_child != NO_NODE and hn.first_child in root_set:
                detach_child(tree, hub, hn.first_child)
                stripped += 1
            while hn.last_child != NO_NODE and hn.last_child in root_set:
                detach_child(tree, hub, hn.last_child)
                stripped += 1
            assert stripped == len(hub_roots), "block not consecutive at hub"
        else:
            for h in hub_roots:
                detach_child(tree, hub, h)
        append_child(tree, hub, repl)
        set_parent_link(tree, repl, hub)
        hn.parent = hn.parent_cell = NO_NODE
        hn.sib1 = hn.sib2 = NO_NODE
        tree.root = hub
        tree.last_replace_wrapped = True
        for a in anchors:
            if a != hub:
                kill_node(tree, a)

    for h in allfull:
        if nodes[h].kind == LEAF:
            tree._leaf_set.discard(h)
        kill_node(tree, h)
    tree._num_leaves += k - len(old)
    tree._leaf_set.update(new_leaves)

    an = nodes[anchor]
    deg = an.child_count + (1 if tree.parent_of(anchor) != NO_NODE else 0)
    if an.kind != LEAF and deg == 2:
        contract_degree2(tree, anchor)
    _ensure_inner_root(tree)
    return new_leaves


def _ensure_inner_root(tree: PCTree) -> None:
    """Re-root at an inner node if a replacement left a leaf as root of a
    tree that has inner nodes."""
    nodes = tree._nodes
    root = tree.root
    if root == NO_NODE or nodes[root].kind != LEAF:
        return
    kids = tree.children_of(root)
    if not kids or nodes[kids[0]].kind == LEAF:
        return  # isolated leaf or the two-leaf degenerate
    child = kids[0]
    set_child_ring(tree, root, [])
    nodes[child].parent = nodes[child].parent_cell = NO_NODE
    nodes[child].sib1 = nodes[child].sib2 = NO_NODE
    tree.root = child
    append_child(tree, child, root)
    set_parent_link(tree, root, child)


def _rotate_ring_left(tree: PCTree, owner: int) -> None:
    """Move the first child of a root ring to the last position (O(1));
    the represented cyclic order is unchanged."""
    nodes = tree._nodes
    pn = nodes[owner]
    f = pn.first_child
    fn = nodes[f]
    nf = fn.sib1 if fn.sib1 != NO_NODE else fn.sib2
    if nf == NO_NODE:
        return
    sib_replace(nodes[nf], f, NO_NODE)
    pn.first_child = nf
    sib_replace(nodes[pn.last_child], NO_NODE, f)
    fn.sib1, fn.sib2 = pn.last_child, NO_NODE
    pn.last_child = f


def _replace_arc_in_cnode(tree: PCTree, anchor: int, start: int,
                          root_set: set[int], repl: int) -> None:
    """Replace a contiguous arc of C-node children by a single node.

    The previous restriction guarantees the block roots occupy one arc
    of the ring; on a root ring the arc may cross the wrap position,
    which is recorded in ``last_replace_wrapped`` and normalized away by
    rotating the ring."""
    nodes = tree._nodes
    pn = nodes[anchor]
    m = len(root_set)
    wrap_ring = pn.parent == NO_NODE and pn.parent_cell == NO_NODE
    outside = pn.child_count - m
    assert outside >= 1, "anchor keeps at least one non-replaced child"
    tree.last_replace_wrapped = (
        wrap_ring
        and pn.first_child in root_set
        and pn.last_child in root_set
    )

    if wrap_ring:
        if outside == 1:
            prev, cur = start, ring_tokens(tree, anchor, start)[0]
            while cur in root_set:
                prev, cur = cur, _ring_step(tree, anchor, cur, prev)
            set_child_ring(tree, anchor, [cur, repl])
            return
        spins = 0
        while pn.first_child in root_set or pn.last_child in root_set:
            _rotate_ring_left(tree, anchor)
            spins += 1
            assert spins <= m + 2, "arc rotation failed to converge"

    ta, tb = ring_tokens(tree, anchor, start)
    ends = []
    seen = 1
    for t in (ta, tb):
        prev, cur = start, t
        while cur >= 0 and cur in root_set:
            seen += 1
            prev, cur = cur, _ring_step(tree, anchor, cur, prev)
        ends.append((prev, cur))  # (last arc member, first token outside)
    assert seen == m, "replaced block is not consecutive around its anchor"
    (end_a, out_a), (end_b, out_b) = ends

    rnode = nodes[repl]
    assert not (out_a == PARENT_EDGE and out_b == PARENT_EDGE)
    if out_a == PARENT_EDGE or out_b == PARENT_EDGE:
        # the arc includes one end of the child list; repl takes that end
        out = out_b if out_a == PARENT_EDGE else out_a
        end_in = end_b if out_a == PARENT_EDGE else end_a
        sib_replace(nodes[out], end_in, repl)
        rnode.sib1, rnode.sib2 = out, NO_NODE
        if pn.first_child in root_set:
            pn.first_child = repl
        if pn.last_child in root_set:
            pn.last_child = repl
    else:
        sib_replace(nodes[out_a], end_a, repl)
        sib_replace(nodes[out_b], end_b, repl)
        rnode.sib1, rnode.sib2 = out_a, out_b
    pn.child_count -= m - 1
