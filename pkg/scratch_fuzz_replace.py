"""Dev fuzz: replace_leaves semantics vs oracle."""
import random, sys
from itertools import permutations
from pctree import PCTree, validate_structure
from pctree.oracle import enumerate_orders, filter_consecutive, canonical_rotation

CASES = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
SEED = int(sys.argv[2]) if len(sys.argv) > 2 else 1

def expected_after_replace(orders, old, new):
    """Replace the consecutive old-block in each order by every
    permutation of the new leaves."""
    old_set = set(old)
    out = set()
    for o in orders:
        rest = [x for x in o if x not in old_set]
        if len(rest) == len(o):  # old empty?
            continue
        for perm in permutations(new):
            if not rest:
                out.add(canonical_rotation(perm))
                continue
            # find position of the block: rotate so block is a prefix
            n = len(o)
            idxs = [i for i, x in enumerate(o) if x in old_set]
            # rotate so that block start at 0
            for s in idxs:
                rot = o[s:] + o[:s]
                if all(x in old_set for x in rot[:len(old_set)]) and not any(x in old_set for x in rot[len(old_set):]):
                    seq = tuple(perm) + tuple(rot[len(old_set):])
                    out.add(canonical_rotation(seq))
                    break
    return out

rng = random.Random(SEED)
fails = 0
for case in range(CASES):
    n = rng.randint(1, 7)
    tree = PCTree(n)
    for s in range(rng.randint(0, 4)):
        R = rng.sample(tree.leaves, rng.randint(0, tree.num_leaves))
        tree.make_consecutive(R)
    # now a replace cycle
    leaves = tree.leaves
    k = rng.randint(1, max(1, 8 - tree.num_leaves + 1))
    r = rng.randint(1, tree.num_leaves)
    R = rng.sample(leaves, r)
    out = tree.make_consecutive(R)
    if not out.possible:
        continue
    before = enumerate_orders(tree)
    try:
        new = tree.replace_leaves(k)
        validate_structure(tree)
        got = enumerate_orders(tree)
    except Exception as e:
        print(f"case {case} n={n} R={sorted(R)} k={k}: EXCEPTION {type(e).__name__}: {e}")
        fails += 1
        if fails > 5: break
        continue
    assert tree.num_leaves == n - r + k, (tree.num_leaves, n, r, k)
    exp = expected_after_replace(before, R, new) if r < n else {canonical_rotation(p) for p in permutations(new)} if k else set()
    if r == n:
        exp = enumerate_orders(PCTree(k)) if k != 1 else {tuple(new)}
        # handles differ; compare sizes and structure instead
        if len(got) != len(exp):
            print(f"case {case} whole-replace size mismatch {len(got)} vs {len(exp)}")
            fails += 1
        continue
    if got != exp:
        print(f"case {case} n={n} R={sorted(R)} k={k}: mismatch")
        print("  got     ", sorted(got)[:8])
        print("  expected", sorted(exp)[:8])
        fails += 1
        if fails > 5: break
print(f"done: {fails} failures")
