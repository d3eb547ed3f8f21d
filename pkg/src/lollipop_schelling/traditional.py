"""Reference engine: full-scan Schelling simulation on an arbitrary topology.

Every step rescans every agent's neighborhood and picks the mover by rejection
sampling over agent indices, exactly as the naive agent-based loop does. Nothing
is cached between steps; this engine is the baseline the count-first engine is
measured against.
"""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass

import numpy as np

from ._jit import grow, njit
from .core import Configuration, Outcome, SchellingParams, SimOutcome, place_agents
from .topology import Topology

# random stream order per step: mover draws (rejection loop), then one vacancy draw


@njit
def _unhappy(indptr, indices, cells, v, p, q):
    x = cells[v]
    same = 0
    occ = 0
    for k in range(indptr[v], indptr[v + 1]):
        y = cells[indices[k]]
        if y != 0:
            occ += 1
            if y == x:
                same += 1
    return q * same < p * occ


@njit
def _run(indptr, indices, cells, p, q, max_steps, rng, rejection, record):
    n = cells.shape[0]
    n_agents = 0
    for v in range(n):
        if cells[v] != 0:
            n_agents += 1
    pos = np.empty(n_agents, dtype=np.int64)
    vac = np.empty(n - n_agents, dtype=np.int64)
    vac_at = np.full(n, -1, dtype=np.int64)
    i = 0
    j = 0
    for v in range(n):
        if cells[v] != 0:
            pos[i] = v
            i += 1
        else:
            vac_at[v] = j
            vac[j] = v
            j += 1
    n_vac = n - n_agents
    unhappy = np.empty(n_agents, dtype=np.int64)
    trace = np.empty((64 if record else 0, 5), dtype=np.int64)
    nrows = 0

    t = 0
    while t < max_steps:
        total = 0
        for a in range(n_agents):
            if _unhappy(indptr, indices, cells, pos[a], p, q):
                unhappy[total] = a
                total += 1
        if record:
            trace = grow(trace, t)
            trace[t, 0] = t
            trace[t, 1] = total
            trace[t, 2] = -1
            trace[t, 3] = -1
            trace[t, 4] = -1
            nrows = t + 1
        if total == 0:
            return 0, t, trace[:nrows]
        if n_vac == 0:
            # no legal move exists, the configuration is frozen
            break
        if rejection:
            while True:
                a = rng.integers(0, n_agents)
                if _unhappy(indptr, indices, cells, pos[a], p, q):
                    break
        else:
            a = unhappy[rng.integers(0, total)]
        k = rng.integers(0, n_vac)
        src = pos[a]
        dst = vac[k]
        cells[dst] = cells[src]
        cells[src] = 0
        vac[k] = src
        vac_at[src] = k
        vac_at[dst] = -1
        pos[a] = dst
        if record:
            trace[t, 2] = a
            trace[t, 3] = src
            trace[t, 4] = dst
        t += 1
    return 1, max_steps, trace[:nrows]


@dataclass
class TraceOptions:
    record_total_unhappy_per_step: bool = True
    record_moves: bool = True

    @property
    def enabled(self) -> bool:
        return self.record_total_unhappy_per_step or self.record_moves


TRACE_HEADER = ("step", "total_unhappy", "mover", "from", "to")


def write_trace_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_HEADER)
        for row in rows:
            w.writerow(["" if x is None else x for x in row])


def _trace_rows(arr, opts: TraceOptions):
    rows = []
    for step, total, mover, src, dst in arr.tolist():
        moved = mover >= 0
        rows.append((
            step,
            total if opts.record_total_unhappy_per_step else None,
            mover if moved and opts.record_moves else None,
            src if moved and opts.record_moves else None,
            dst if moved and opts.record_moves else None,
        ))
    return rows


def simulate_traditional(topo: Topology, params: SchellingParams, seed=None,
                         trace: TraceOptions | None = None, initial: Configuration | None = None,
                         rejection: bool = True) -> SimOutcome:
    """Run the full-scan process until every agent is satisfied or ``max_steps`` moves.

    ``initial`` overrides random placement (the seed then only drives moves).
    ``rejection=False`` samples the mover directly from the scanned unhappy list
    instead of the literal rejection loop; both give the same process law but
    consume the random stream differently.
    """
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    if initial is None:
        config = place_agents(topo, params, rng)
    else:
        if len(initial) != topo.vertex_count:
            raise ValueError("initial configuration does not match topology size")
        if initial.counts() != (params.count_a, params.count_b):
            raise ValueError("initial configuration does not match agent counts")
        config = initial.copy()
    record = trace is not None and trace.enabled
    status, steps, arr = _run(topo.indptr, topo.indices, config.cells, params.tau.p, params.tau.q,
                              params.max_steps, rng, rejection, record)
    wall = time.perf_counter() - start
    result = Outcome.SATISFIED if status == 0 else Outcome.TIMED_OUT
    rows = _trace_rows(arr, trace) if record else None
    return SimOutcome(result, int(steps), wall, seed, rows)
