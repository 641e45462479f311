"""Brute-force reference semantics for small trees.

An order set is the explicit set of circular leaf orders a tree stands
for, each stored rotation-canonically (lexicographically minimal
rotation).  Reversed orders are distinct members; reversing every inner
node yields the reversed circular order, which counts as its own valid
permutation.

Everything here is deliberately naive and only meant for exhaustive
cross-checking at desk scale (at most nine leaves).
"""

from __future__ import annotations

from itertools import permutations

from .core import LEAF, NO_NODE, PCTree, PCTreeError

ORACLE_LEAF_BOUND = 9


class TooLargeError(PCTreeError):
    """The tree exceeds the enumeration bound."""


def canonical_rotation(seq) -> tuple:
    """The lexicographically minimal rotation of a circular sequence."""
    seq = tuple(seq)
    n = len(seq)
    if n <= 1:
        return seq
    return min(seq[i:] + seq[:i] for i in range(n))


def is_consecutive(order, members) -> bool:
    """True iff ``members`` occupy one contiguous circular arc of ``order``."""
    members = set(members)
    n = len(order)
    m = len(members)
    if m == 0 or m == n:
        return True
    transitions = 0
    prev = order[-1] in members
    for x in order:
        cur = x in members
        if cur != prev:
            transitions += 1
        prev = cur
    return transitions == 2


def filter_consecutive(orders, members) -> set[tuple]:
    """Keep the orders in which ``members`` form a circular arc."""
    return {o for o in orders if is_consecutive(o, members)}


def enumerate_orders(tree: PCTree, bound: int = ORACLE_LEAF_BOUND) -> set[tuple]:
    """Every valid circular order of the tree, rotation-canonicalized.

    P-node children are permuted freely, C-node child orders may only be
    reversed.  Leaves are identified by their handles.
    """
    if tree.num_leaves > bound:
        raise TooLargeError(
            f"{tree.num_leaves} leaves exceed the enumeration bound {bound}")
    if tree.root == NO_NODE:
        return {()}

    def variants(h: int) -> list[tuple]:
        node = tree.node(h)
        kids = tree.children_of(h)
        if node.kind == LEAF:
            if not kids:
                return [(h,)]
            # degenerate two-leaf tree rooted at a leaf
            return [(h,) + v for v in variants(kids[0])]
        child_variants = [variants(c) for c in kids]

        def combos(order):
            out = [()]
            for idx in order:
                out = [acc + v for acc in out for v in child_variants[idx]]
            return out

        idxs = list(range(len(kids)))
        result: list[tuple] = []
        if node.kind == 1:  # P-node
            for perm in permutations(idxs):
                result.extend(combos(perm))
        else:  # C-node: stored order and its reversal
            result.extend(combos(idxs))
            result.extend(combos(list(reversed(idxs))))
        return result

    return {canonical_rotation(v) for v in variants(tree.root)}
