"""Classical random-walk baselines: hypercube hitting times and welded-tree exit search."""
import argparse

import numpy as np

from lollipop_schelling.cli import derive_seeds, welded_tree_trials
from lollipop_schelling.walks import (hypercube_hitting_exact, hypercube_hitting_times,
                                      welded_tree_expected_steps)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=10)
    ap.add_argument("--hypercube-trials", type=int, default=20000)
    ap.add_argument("--heights", type=int, nargs="+", default=[3, 4, 5, 6, 7, 8])
    ap.add_argument("--tree-trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print("hypercube: n  exact  simulated  ratio")
    prev = None
    for n in range(1, args.max_n + 1):
        exact = hypercube_hitting_exact(n)
        sim = hypercube_hitting_times(n, args.hypercube_trials, args.seed + n).mean()
        ratio = "" if prev is None else f"{float(exact / prev):.3f}"
        print(f"  {n:>2} {float(exact):>12.3f} {sim:>12.3f}  {ratio}")
        prev = exact

    print("welded tree: height  median queries  mean  expected  ratio of medians")
    prev = None
    for h in args.heights:
        rows = welded_tree_trials(h, derive_seeds(args.seed, args.tree_trials), 10**8)
        q = np.array([r["queries"] for r in rows])
        med = float(np.median(q))
        ratio = "" if prev is None else f"{med / prev:.3f}"
        print(f"  {h:>2} {med:>12.1f} {q.mean():>10.1f} {1 + 2 * welded_tree_expected_steps(h):>10.1f}  {ratio}")
        prev = med


if __name__ == "__main__":
    main()
