"""Exact expected number of moves to global satisfaction on tiny instances.

Builds the Markov chain over every typed configuration (agents of one type are
indistinguishable) under the uniform-unhappy-mover / uniform-vacancy rule and
solves the absorbing-chain system. This code path shares nothing with the
simulation kernels beyond the satisfaction predicate, so it can referee them.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .core import A, B, Configuration, SchellingParams, unhappy_vertices
from .markov import absorption_times, absorption_times_exact
from .topology import ResourceCapError, Topology

DEFAULT_MAX_STATES = 10**6
EXACT_MAX_TRANSIENT = 80


@dataclass
class OracleResult:
    """``mean`` is the uniform-start expectation (``inf`` if some start never settles)."""

    unsatisfiable: bool
    mean: float
    mean_exact: Fraction | None
    per_state: dict[str, float]
    per_state_exact: dict[str, Fraction | None] | None
    state_count: int

    def expected_from(self, config: Configuration | str) -> float:
        key = config if isinstance(config, str) else config.to_string()
        return self.per_state[key]


def state_space_size(n: int, a: int, b: int) -> int:
    return math.comb(n, a) * math.comb(n - a, b)


def _enumerate(n: int, a: int, b: int):
    for apos in itertools.combinations(range(n), a):
        rest = [v for v in range(n) if v not in apos]
        for bpos in itertools.combinations(rest, b):
            cells = np.zeros(n, dtype=np.int8)
            cells[list(apos)] = A
            cells[list(bpos)] = B
            yield cells


def exact_expected_moves(topo: Topology, params: SchellingParams, exact: bool | None = None,
                         max_states: int = DEFAULT_MAX_STATES) -> OracleResult:
    """Exact E[T] from a uniformly random placement, plus per-start-state values.

    ``exact=None`` picks rational arithmetic when the transient part is small
    (at most ``EXACT_MAX_TRANSIENT`` states) and a sparse float solve otherwise.
    """
    n = topo.vertex_count
    params.validate_for(n)
    size = state_space_size(n, params.count_a, params.count_b)
    if size > max_states:
        raise ResourceCapError(f"state space has {size} configurations, cap is {max_states}")
    tau = params.tau
    states = list(_enumerate(n, params.count_a, params.count_b))
    index = {s.tobytes(): i for i, s in enumerate(states)}
    rows: list[dict[int, Fraction]] = []
    absorbing = []
    for cells in states:
        config = Configuration(cells)
        unhappy = unhappy_vertices(config, topo, tau)
        vac = np.flatnonzero(cells == 0).tolist()
        row: dict[int, Fraction] = {}
        if not unhappy:
            absorbing.append(True)
        elif not vac:
            absorbing.append(False)
            row[index[cells.tobytes()]] = Fraction(1)
        else:
            absorbing.append(False)
            w = Fraction(1, len(unhappy) * len(vac))
            for u in unhappy:
                for v in vac:
                    nxt = cells.copy()
                    nxt[v] = nxt[u]
                    nxt[u] = 0
                    j = index[nxt.tobytes()]
                    row[j] = row.get(j, Fraction(0)) + w
        rows.append(row)
    absorbing_arr = np.asarray(absorbing, dtype=bool)
    keys = [Configuration(s).to_string() for s in states]

    if not absorbing_arr.any():
        return OracleResult(True, math.inf, None, {k: math.inf for k in keys}, None, size)

    r_idx = [i for i, r in enumerate(rows) for _ in r]
    c_idx = [j for r in rows for j in r]
    vals = [float(x) for r in rows for x in r.values()]
    P = sp.csr_matrix((vals, (r_idx, c_idx)), shape=(size, size))
    times = absorption_times(P, absorbing_arr)
    per_state = dict(zip(keys, times.tolist()))
    mean = float(times.mean()) if np.isfinite(times).all() else math.inf

    transient = int((~absorbing_arr).sum())
    use_exact = transient <= EXACT_MAX_TRANSIENT if exact is None else exact
    per_exact = mean_exact = None
    if use_exact:
        ex = absorption_times_exact(rows, absorbing)
        per_exact = dict(zip(keys, ex))
        if all(x is not None for x in ex):
            mean_exact = sum(ex, Fraction(0)) / size
    return OracleResult(False, mean, mean_exact, per_state, per_exact, size)
