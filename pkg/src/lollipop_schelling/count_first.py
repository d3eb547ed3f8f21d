"""Count-first engine for lollipop networks.

The clique is kept as two tallies because every clique agent of a given type sees
the same neighborhood; its satisfaction is an O(1) integer test. The path keeps
its cells explicitly plus a swap-remove set of unhappy vertices, so a move only
re-evaluates the handful of path vertices next to its source and destination.

Site layout inside the kernel:

* interior clique sites: interchangeable, represented by counts ``(ia, ib)``;
* the bridge clique vertex (vertex 0), tracked as its own cell only when
  ``exact_bridge`` is on, because only then does its neighborhood differ;
* path cells ``0..m-1`` (global vertex ids ``clique_size + j``).

Without ``exact_bridge`` the bridge edge is ignored: the clique and the path are
evaluated as disconnected components.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ._jit import grow, njit, set_add, set_remove
from .core import (A, B, VACANT, Configuration, Outcome, SchellingParams, SimOutcome,
                   Threshold, random_cells)
from .topology import LollipopSpec

# Synthetic trace ids for clique agents, whose identities are not tracked.
CLIQUE_A = -1
CLIQUE_B = -2
CLIQUE_SITE = -1
NO_MOVE = -9
# Path cell j appears in kernel traces as PATH_BASE + j, keeping it clear of the
# bridge site (0) and the synthetic clique ids (negative).
PATH_BASE = 1

_MOVER_LABELS = {CLIQUE_A: "clique-A", CLIQUE_B: "clique-B"}


def decide_clique(a: int, b: int, tau: Threshold) -> SimOutcome:
    """Decide a clique instance without simulating: satisfied now, or never."""
    if a + b < 1:
        raise ValueError("at least one agent is required")
    return SimOutcome(Outcome.SATISFIED if clique_unhappy(a, b, tau) == 0 else Outcome.UNSATISFIABLE, 0)


def _clique_type_unhappy(cx: int, total: int, tau: Threshold, approximate: bool = False) -> bool:
    if approximate:
        return tau.q * cx < tau.p * total
    if total < 2:
        return False
    return tau.q * (cx - 1) < tau.p * (total - 1)


def clique_unhappy(c_a: int, c_b: int, tau: Threshold, approximate: bool = False) -> int:
    """Number of unhappy agents in a clique holding ``c_a`` A's and ``c_b`` B's.

    ``approximate`` switches to the self-inclusive test ``C_X < tau * (C_A + C_B)``.
    """
    total = c_a + c_b
    n = 0
    if c_a and _clique_type_unhappy(c_a, total, tau, approximate):
        n += c_a
    if c_b and _clique_type_unhappy(c_b, total, tau, approximate):
        n += c_b
    return n


@dataclass
class LollipopCounts:
    """Compressed state of a lollipop configuration."""

    spec: LollipopSpec
    c_a: int
    c_b: int
    path_cells: np.ndarray
    exact_bridge: bool = False
    bridge_cell: int = VACANT

    @classmethod
    def from_configuration(cls, spec: LollipopSpec, config: Configuration,
                           exact_bridge: bool = False) -> "LollipopCounts":
        cells = config.cells
        k = spec.clique_size
        tracked = exact_bridge and spec.path_length > 0
        clique = cells[1:k] if tracked else cells[:k]
        return cls(spec, int(np.count_nonzero(clique == A)), int(np.count_nonzero(clique == B)),
                   cells[k:].copy(), tracked, int(cells[0]) if tracked else VACANT)

    @property
    def interior_sites(self) -> int:
        return self.spec.clique_size - (1 if self.exact_bridge else 0)

    @property
    def clique_vacancies(self) -> int:
        return self.interior_sites - self.c_a - self.c_b + (self.bridge_cell == VACANT if self.exact_bridge else 0)

    @property
    def path_vacancies(self) -> int:
        return int(np.count_nonzero(self.path_cells == VACANT))

    def to_configuration(self) -> Configuration:
        """A concrete configuration with this state (clique agents packed in id order)."""
        k = self.spec.clique_size
        cells = np.zeros(self.spec.vertex_count, dtype=np.int8)
        start = 1 if self.exact_bridge else 0
        cells[start:start + self.c_a] = A
        cells[start + self.c_a:start + self.c_a + self.c_b] = B
        if self.exact_bridge:
            cells[0] = self.bridge_cell
        cells[k:] = self.path_cells
        return Configuration(cells)


@njit
def _path_unhappy(path, j, has_bridge, bridge, p, q):
    x = path[j]
    same = 0
    occ = 0
    m = path.shape[0]
    if j > 0 and path[j - 1] != 0:
        occ += 1
        if path[j - 1] == x:
            same += 1
    if j + 1 < m and path[j + 1] != 0:
        occ += 1
        if path[j + 1] == x:
            same += 1
    if j == 0 and has_bridge and bridge != 0:
        occ += 1
        if bridge == x:
            same += 1
    return q * same < p * occ


@njit
def _refresh(path, j, has_bridge, bridge, p, q, pu, pu_at, n_pu):
    if j < 0 or j >= path.shape[0] or path[j] == 0:
        return n_pu, 0
    bad = _path_unhappy(path, j, has_bridge, bridge, p, q)
    if bad and pu_at[j] < 0:
        n_pu = set_add(pu, pu_at, n_pu, j)
    elif not bad and pu_at[j] >= 0:
        n_pu = set_remove(pu, pu_at, n_pu, j)
    return n_pu, 1


@njit
def _interior_unhappy(cx, ia, ib, bridge_same, bridge_occ, p, q, approximate):
    tot = ia + ib + bridge_occ
    same = cx + bridge_same
    if approximate:
        return q * same < p * tot
    return q * (same - 1) < p * (tot - 1)


@njit
def _run(k_int, has_bridge, bridge, ia, ib, path, p, q, max_steps, rng,
         approximate, skip_internal, record):
    """Returns (status, steps, max_evals_per_step, trace, ia, ib, bridge).

    status 0 = satisfied, 1 = timed out. Trace rows are
    (step, total_unhappy, path_unhappy, mover, from, to, evals).
    Path positions in the trace are local indices offset by ``PATH_BASE``.
    """
    m = path.shape[0]
    pu = np.empty(m, dtype=np.int64)
    pu_at = np.full(m, -1, dtype=np.int64)
    pv = np.empty(m, dtype=np.int64)
    pv_at = np.full(m, -1, dtype=np.int64)
    n_pu = 0
    n_pv = 0
    for j in range(m):
        if path[j] == 0:
            n_pv = set_add(pv, pv_at, n_pv, j)
        elif _path_unhappy(path, j, has_bridge, bridge, p, q):
            n_pu = set_add(pu, pu_at, n_pu, j)

    trace = np.empty((64 if record else 0, 7), dtype=np.int64)
    nrows = 0
    max_evals = 0
    t = 0
    while t < max_steps:
        ba = 1 if bridge == 1 else 0
        bb = 1 if bridge == -1 else 0
        bo = ba + bb
        ua = ia if ia > 0 and _interior_unhappy(ia, ia, ib, ba, bo, p, q, approximate) else 0
        ub = ib if ib > 0 and _interior_unhappy(ib, ia, ib, bb, bo, p, q, approximate) else 0
        ubr = 0
        if has_bridge and bridge != 0:
            same = ia + ba if bridge == 1 else ib + bb
            occ = ia + ib + bo
            if m > 0 and path[0] != 0:
                occ += 1
                if path[0] == bridge:
                    same += 1
            if q * (same - 1) < p * (occ - 1):
                ubr = 1
        total = ua + ub + ubr + n_pu
        if record:
            trace = grow(trace, nrows)
            trace[nrows, 0] = t
            trace[nrows, 1] = total
            trace[nrows, 2] = n_pu
            trace[nrows, 3] = NO_MOVE
            trace[nrows, 4] = NO_MOVE
            trace[nrows, 5] = NO_MOVE
            trace[nrows, 6] = 0
            nrows += 1
        if total == 0:
            return 0, t, max_evals, trace[:nrows], ia, ib, bridge

        vi = k_int - ia - ib
        vb = 1 if has_bridge and bridge == 0 else 0
        nv = vi + vb + n_pv
        if nv == 0 or (ua + ub == total and vi == nv):
            # every legal move leaves the state unchanged
            break

        r = rng.integers(0, total)
        d = rng.integers(0, nv)
        src_interior = r < ua + ub
        dst_interior = d < vi
        if skip_internal and src_interior and dst_interior:
            if record:
                nrows -= 1
            continue

        evals = 0
        bridge_changed = False
        # remove the mover from its site
        if r < ua:
            x = 1
            ia -= 1
            mover = -1
            src = -1
        elif r < ua + ub:
            x = -1
            ib -= 1
            mover = -2
            src = -1
        elif r < ua + ub + ubr:
            x = bridge
            bridge = 0
            bridge_changed = True
            mover = 0
            src = 0
        else:
            j = pu[r - ua - ub - ubr]
            x = path[j]
            path[j] = 0
            n_pu = set_remove(pu, pu_at, n_pu, j)
            n_pv = set_add(pv, pv_at, n_pv, j)
            mover = PATH_BASE + j
            src = PATH_BASE + j
        # place it at the destination
        if dst_interior:
            if x == 1:
                ia += 1
            else:
                ib += 1
            dst = -1
        elif d < vi + vb:
            bridge = x
            bridge_changed = True
            dst = 0
        else:
            jd = pv[d - vi - vb]
            path[jd] = x
            n_pv = set_remove(pv, pv_at, n_pv, jd)
            dst = PATH_BASE + jd
        # local re-evaluation on the path
        if src >= PATH_BASE:
            j = src - PATH_BASE
            n_pu, e = _refresh(path, j - 1, has_bridge, bridge, p, q, pu, pu_at, n_pu)
            evals += e
            n_pu, e = _refresh(path, j + 1, has_bridge, bridge, p, q, pu, pu_at, n_pu)
            evals += e
        if dst >= PATH_BASE:
            j = dst - PATH_BASE
            n_pu, e = _refresh(path, j - 1, has_bridge, bridge, p, q, pu, pu_at, n_pu)
            evals += e
            n_pu, e = _refresh(path, j, has_bridge, bridge, p, q, pu, pu_at, n_pu)
            evals += e
            n_pu, e = _refresh(path, j + 1, has_bridge, bridge, p, q, pu, pu_at, n_pu)
            evals += e
        if bridge_changed and has_bridge:
            n_pu, e = _refresh(path, 0, has_bridge, bridge, p, q, pu, pu_at, n_pu)
            evals += e
        if evals > max_evals:
            max_evals = evals
        if record:
            trace[nrows - 1, 3] = mover
            trace[nrows - 1, 4] = src
            trace[nrows - 1, 5] = dst
            trace[nrows - 1, 6] = evals
        t += 1
    return 1, max_steps, max_evals, trace[:nrows], ia, ib, bridge


@dataclass
class CountFirstRun:
    outcome: SimOutcome
    initial: LollipopCounts
    final: LollipopCounts
    max_evals_per_step: int
    raw_trace: np.ndarray | None


def _trace_rows(raw, spec: LollipopSpec, exact_bridge: bool):
    """Convert kernel rows to (step, total_unhappy, mover, from, to) with lollipop vertex ids."""
    k = spec.clique_size

    def site(code):
        if code == CLIQUE_SITE:
            return "clique"
        if code == 0:
            return 0
        return k + code - PATH_BASE

    rows = []
    for step, total, _, mover, src, dst, _ in raw.tolist():
        if mover == NO_MOVE:
            rows.append((step, total, None, None, None))
            continue
        label = _MOVER_LABELS.get(mover) if mover < 0 else site(mover)
        rows.append((step, total, label, site(src), site(dst)))
    return rows


def run_lollipop(spec: LollipopSpec, params: SchellingParams, seed=None, *,
                 max_steps: int | None = None, exact_bridge: bool = False,
                 skip_clique_internal: bool = False, approximate_clique: bool = False,
                 initial: Configuration | None = None, record: bool = False) -> CountFirstRun:
    """Count-first simulation with full diagnostics (initial/final state, evaluation counter)."""
    params.validate_for(spec.vertex_count)
    rng = np.random.default_rng(seed)
    max_steps = params.max_steps if max_steps is None else max_steps
    start = time.perf_counter()
    if initial is None:
        initial = Configuration(random_cells(spec.vertex_count, params.count_a, params.count_b, rng))
    elif initial.counts() != (params.count_a, params.count_b) or len(initial) != spec.vertex_count:
        raise ValueError("initial configuration does not match the lollipop and agent counts")
    state = LollipopCounts.from_configuration(spec, initial, exact_bridge)
    path = state.path_cells.copy()
    status, steps, max_evals, raw, ia, ib, bridge = _run(
        state.interior_sites, state.exact_bridge, state.bridge_cell, state.c_a, state.c_b, path,
        params.tau.p, params.tau.q, max_steps, rng, approximate_clique, skip_clique_internal, record)
    wall = time.perf_counter() - start
    final = LollipopCounts(spec, int(ia), int(ib), path, state.exact_bridge, int(bridge))
    result = Outcome.SATISFIED if status == 0 else Outcome.TIMED_OUT
    rows = _trace_rows(raw, spec, state.exact_bridge) if record else None
    return CountFirstRun(SimOutcome(result, int(steps), wall, seed, rows), state, final,
                         int(max_evals), raw if record else None)


def simulate_lollipop_count_first(spec: LollipopSpec, params: SchellingParams, seed=None,
                                  max_steps: int | None = None, **flags) -> SimOutcome:
    """Count-first Schelling process on a lollipop; returns the outcome only.

    Flags: ``exact_bridge``, ``skip_clique_internal``, ``approximate_clique``,
    ``initial``, ``record``.
    """
    return run_lollipop(spec, params, seed, max_steps=max_steps, **flags).outcome


def simulate_path(path_length: int, a: int, b: int, tau: Threshold, seed=None,
                  max_steps: int = 10**7, initial: Configuration | None = None,
                  record: bool = False) -> SimOutcome:
    """Schelling process on a bare path with a cached unhappy set."""
    if a + b > path_length:
        raise ValueError(f"{a + b} agents do not fit on a path of {path_length}")
    params = SchellingParams(a, b, tau, max_steps)
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    if initial is None:
        cells = random_cells(path_length, a, b, rng)
    else:
        if initial.counts() != (a, b) or len(initial) != path_length:
            raise ValueError("initial configuration does not match the path and agent counts")
        cells = initial.cells.copy()
    status, steps, _, raw, _, _, _ = _run(0, False, 0, 0, 0, cells, tau.p, tau.q, params.max_steps,
                                          rng, False, False, record)
    wall = time.perf_counter() - start
    rows = None
    if record:
        rows = [(s, tot, None, None, None) if mv == NO_MOVE else
                (s, tot, mv - PATH_BASE, f - PATH_BASE, d - PATH_BASE)
                for s, tot, _, mv, f, d, _ in raw.tolist()]
    return SimOutcome(Outcome.SATISFIED if status == 0 else Outcome.TIMED_OUT, int(steps), wall, seed, rows)
