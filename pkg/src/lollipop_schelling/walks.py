"""Random-walk contrast cases: hypercube hitting times and the welded-tree query model."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from ._jit import njit
from .markov import absorption_times, absorption_times_exact, tridiagonal_solve_exact
from .topology import Topology, build_hypercube

MAX_EXACT_DIM = 20


@dataclass
class WalkOutcome:
    steps_or_queries: int
    found: bool
    seed: object = None


@njit
def _hypercube_walks(n, trials, rng, max_steps):
    out = np.empty(trials, dtype=np.int64)
    target = (1 << n) - 1
    for t in range(trials):
        s = 0
        k = 0
        while s != target and k < max_steps:
            s ^= 1 << rng.integers(0, n)
            k += 1
        out[t] = k if s == target else -1
    return out


def hypercube_hitting_times(n: int, trials: int, seed=None, max_steps: int = 10**9) -> np.ndarray:
    """Hitting times of ``trials`` independent walks; ``-1`` marks a capped walk."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return _hypercube_walks(n, trials, np.random.default_rng(seed), max_steps)


def hypercube_hitting_simulate(n: int, seed=None, max_steps: int = 10**9) -> WalkOutcome:
    """Walk from 0^n flipping one uniformly chosen bit per step until 1^n."""
    k = int(hypercube_hitting_times(n, 1, seed, max_steps)[0])
    return WalkOutcome(k if k >= 0 else max_steps, k >= 0, seed)


def hypercube_hitting_exact(n: int) -> Fraction:
    """Exact expected hitting time of 1^n from 0^n.

    By symmetry only the Hamming weight d matters: from weight d the walk moves to
    d+1 with probability (n-d)/n and to d-1 with probability d/n. That leaves a
    tridiagonal system over d = 0..n-1.
    """
    if not 1 <= n <= MAX_EXACT_DIM:
        raise ValueError(f"dimension must be in 1..{MAX_EXACT_DIM}")
    lower = [Fraction(-d, n) for d in range(n)]
    diag = [Fraction(1)] * n
    upper = [Fraction(-(n - d), n) for d in range(n)]
    return tridiagonal_solve_exact(lower, diag, upper, [Fraction(1)] * n)[0]


def hypercube_hitting_full_state(n: int) -> Fraction:
    """Same quantity from the full 2^n-state chain (cross-check, small n only)."""
    topo = build_hypercube(n)
    rows = [{int(u): Fraction(1, n) for u in topo.neighbors(v)} for v in range(topo.vertex_count)]
    target = topo.vertex_count - 1
    rows[target] = {}
    absorbing = [v == target for v in range(topo.vertex_count)]
    return absorption_times_exact(rows, absorbing)[0]


class CountingOracles:
    """Adjacency and exit-check oracles over a graph, counting every call."""

    def __init__(self, topo: Topology, exit_vertex: int):
        self._topo = topo
        self._exit = exit_vertex
        self.queries = 0

    def adjacency(self, v: int) -> list[int]:
        self.queries += 1
        return self._topo.neighbors(v).tolist()

    def is_exit(self, v: int) -> bool:
        self.queries += 1
        return v == self._exit


def random_walk_search(entrance: int, adjacency: Callable[[int], Sequence[int]],
                       is_exit: Callable[[int], bool], rng: np.random.Generator,
                       max_steps: int) -> tuple[int | None, int]:
    """Plain random walk in the query model.

    Only the two oracles and the entrance label are available. Returns the exit
    label (or ``None`` when capped) and the number of steps taken.
    """
    v = entrance
    if is_exit(v):
        return v, 0
    for step in range(1, max_steps + 1):
        nbrs = adjacency(v)
        v = nbrs[rng.integers(len(nbrs))]
        if is_exit(v):
            return v, step
    return None, max_steps


def welded_tree_classical_walk(tree: Topology, seed=None, max_queries: int = 10**7) -> WalkOutcome:
    """Count oracle queries a random walk spends finding the exit of a welded tree."""
    spec = tree.meta["welded_tree"]
    oracles = CountingOracles(tree, spec.exit)
    rng = np.random.default_rng(seed)
    # each step costs one adjacency query and one exit check
    found, _ = random_walk_search(spec.entrance, oracles.adjacency, oracles.is_exit, rng,
                                  max(0, (max_queries - 1) // 2))
    return WalkOutcome(oracles.queries, found is not None, seed)


def welded_tree_level_chain(height: int) -> np.ndarray:
    """Transition matrix of the walk projected onto the 2h+2 column levels (exit absorbing)."""
    L = 2 * height + 2
    P = np.zeros((L, L))
    P[0, 1] = 1.0
    for j in range(1, L - 1):
        if j < height:
            P[j, j - 1], P[j, j + 1] = 1 / 3, 2 / 3
        elif j in (height, height + 1):
            P[j, j - 1], P[j, j + 1] = 1 / 2, 1 / 2
        else:
            P[j, j - 1], P[j, j + 1] = 2 / 3, 1 / 3
    P[L - 1, L - 1] = 1.0
    return P


def welded_tree_expected_steps(height: int) -> float:
    """Exact expected walk length from entrance to exit via the level projection."""
    P = welded_tree_level_chain(height)
    absorbing = np.zeros(len(P), dtype=bool)
    absorbing[-1] = True
    P[-1, -1] = 0.0
    return float(absorption_times(sp.csr_matrix(P), absorbing)[0])
