"""Qubit counts, term counts and encoding time for grid placement problems."""
import argparse

from lollipop_schelling.core import SchellingParams, Threshold
from lollipop_schelling.qubo import encode_qubo
from lollipop_schelling.topology import build_clique, build_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grids", type=int, nargs="+", default=[3, 4, 5, 6, 8, 10])
    ap.add_argument("--cliques", type=int, nargs="+", default=[10, 20, 50, 100])
    ap.add_argument("--density", type=float, default=0.8)
    args = ap.parse_args()

    print(f"{'instance':<12} {'vertices':>8} {'qubits':>7} {'terms':>8} {'encode ms':>10}")
    cases = [(f"{k}x{k} grid", build_grid(k, k)) for k in args.grids]
    cases += [(f"K{k}", build_clique(k)) for k in args.cliques]
    for label, topo in cases:
        agents = max(1, round(args.density * topo.vertex_count))
        params = SchellingParams(agents // 2, agents - agents // 2, Threshold(1, 2))
        _, report = encode_qubo(topo, params)
        print(f"{label:<12} {topo.vertex_count:>8} {report.num_qubits:>7} {report.term_count:>8} "
              f"{1e3 * report.encode_wall_time:>10.3f}")


if __name__ == "__main__":
    main()
