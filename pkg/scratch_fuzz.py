"""Dev fuzz loop: random restriction sequences vs the brute-force oracle."""
import random
import sys

from pctree import PCTree, validate_structure
from pctree.oracle import enumerate_orders, filter_consecutive

CASES = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
SEED = int(sys.argv[2]) if len(sys.argv) > 2 else 1
MAXN = int(sys.argv[3]) if len(sys.argv) > 3 else 7

rng = random.Random(SEED)
fails = 0
for case in range(CASES):
    n = rng.randint(1, MAXN)
    tree = PCTree(n)
    orders = enumerate_orders(tree)
    steps = rng.randint(1, 6)
    hist = []
    for s in range(steps):
        leaves = tree.leaves
        k = rng.randint(0, n)
        R = rng.sample(leaves, k)
        hist.append(sorted(R))
        expected = filter_consecutive(orders, R)
        try:
            out = tree.make_consecutive(R)
            validate_structure(tree)
            got = enumerate_orders(tree)
        except Exception as e:
            print(f"case {case} n={n} hist={hist}: EXCEPTION {type(e).__name__}: {e}")
            fails += 1
            break
        if out.possible != bool(expected):
            print(f"case {case} n={n} hist={hist}: verdict {out.possible} oracle {bool(expected)}")
            fails += 1
            break
        if out.possible:
            if got != expected:
                print(f"case {case} n={n} hist={hist}: order set mismatch")
                print("  got     ", sorted(got))
                print("  expected", sorted(expected))
                fails += 1
                break
            orders = expected
        else:
            if got != orders:
                print(f"case {case} n={n} hist={hist}: impossible mutated the tree")
                fails += 1
                break
    if fails > 10:
        break
print(f"done: {case+1} cases, {fails} failures")
