"""Replay engine traces against full recounts (shared by unit and acceptance tests)."""
from dataclasses import replace

import numpy as np

from lollipop_schelling.core import A, B, Configuration, count_unhappy, unhappy_vertices
from lollipop_schelling.count_first import (CLIQUE_SITE, NO_MOVE, PATH_BASE, CountFirstRun,
                                            clique_unhappy)
from lollipop_schelling.topology import build_lollipop, build_path

MAX_PATH_EVALS = 6


def replay_count_first(run: CountFirstRun, tau) -> int:
    """Check cached path-unhappy counts and totals at every step; returns rows checked."""
    spec = run.initial.spec
    k = spec.clique_size
    lolli = build_lollipop(spec.clique_size, spec.path_length)
    path_topo = build_path(spec.path_length) if spec.path_length else None
    state = replace(run.initial, path_cells=run.initial.path_cells.copy())
    rows = 0
    for step, total, n_pu, mover, src, dst, evals in run.raw_trace.tolist():
        config = state.to_configuration()
        if state.exact_bridge:
            bad = unhappy_vertices(config, lolli, tau)
            assert total == len(bad), f"step {step}: total {total} != recount {len(bad)}"
            path_bad = sum(v >= k for v in bad)
        else:
            path_bad = (count_unhappy(Configuration(state.path_cells), path_topo, tau)
                        if path_topo else 0)
            expect = path_bad + clique_unhappy(state.c_a, state.c_b, tau)
            assert total == expect, f"step {step}: total {total} != recount {expect}"
        assert n_pu == path_bad, f"step {step}: cached path_unhappy {n_pu} != recount {path_bad}"
        assert 0 <= evals <= MAX_PATH_EVALS
        rows += 1
        if mover == NO_MOVE:
            continue
        if mover == -1:
            x = A
        elif mover == -2:
            x = B
        elif mover == 0:
            x = state.bridge_cell
        else:
            x = int(state.path_cells[mover - PATH_BASE])
        assert x != 0, f"step {step}: mover sits on a vacancy"
        # vacate the source
        if src == CLIQUE_SITE:
            if x == A:
                state.c_a -= 1
            else:
                state.c_b -= 1
        elif src == 0:
            state.bridge_cell = 0
        else:
            state.path_cells[src - PATH_BASE] = 0
        # fill the destination
        if dst == CLIQUE_SITE:
            if x == A:
                state.c_a += 1
            else:
                state.c_b += 1
            assert state.c_a + state.c_b <= state.interior_sites
        elif dst == 0:
            assert state.bridge_cell == 0
            state.bridge_cell = x
        else:
            assert state.path_cells[dst - PATH_BASE] == 0, f"step {step}: destination occupied"
            state.path_cells[dst - PATH_BASE] = x
    fin = run.final
    assert (state.c_a, state.c_b, state.bridge_cell) == (fin.c_a, fin.c_b, fin.bridge_cell)
    assert np.array_equal(state.path_cells, fin.path_cells)
    return rows


def replay_traditional(topo, initial: Configuration, tau, rows) -> Configuration:
    """Apply recorded moves to ``initial``, checking each recorded total against a recount.

    Agents are numbered by their initial vertex in increasing order; the trace's
    mover column is that agent number.
    """
    config = initial.copy()
    position = np.flatnonzero(config.cells != 0)
    for step, total, mover, src, dst in rows:
        recount = count_unhappy(config, topo, tau)
        assert total == recount, f"step {step}: total {total} != recount {recount}"
        if mover is None:
            continue
        assert position[mover] == src, f"step {step}: agent {mover} is not at {src}"
        position[mover] = dst
        assert config.cells[src] != 0 and config.cells[dst] == 0
        config.cells[dst] = config.cells[src]
        config.cells[src] = 0
    return config
