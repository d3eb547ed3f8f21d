import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import ks_2samp

from replay import replay_count_first, replay_traditional

from lollipop_schelling.core import (Configuration, Outcome, SchellingParams, Threshold,
                                     count_unhappy, place_agents)
from lollipop_schelling.count_first import (LollipopCounts, clique_unhappy, decide_clique,
                                            run_lollipop, simulate_lollipop_count_first,
                                            simulate_path)
from lollipop_schelling.oracle import exact_expected_moves
from lollipop_schelling.topology import (LollipopSpec, ResourceCapError, build_clique,
                                         build_lollipop, build_path)
from lollipop_schelling.traditional import TraceOptions, simulate_traditional, write_trace_csv

HALF = Threshold(1, 2)
taus = st.sampled_from([Threshold(1, 4), Threshold(1, 3), HALF, Threshold(2, 3)])


class TestTraditional:
    def test_already_satisfied(self):
        topo = build_path(5)
        init = Configuration.from_string("AA.BB")
        out = simulate_traditional(topo, SchellingParams(2, 2, HALF), 0, initial=init)
        assert out.result is Outcome.SATISFIED and out.steps == 0

    def test_frozen_when_no_vacancy(self):
        topo = build_clique(4)
        out = simulate_traditional(topo, SchellingParams(2, 2, HALF, max_steps=50), 0)
        assert out.result is Outcome.TIMED_OUT and out.steps == 50

    def test_unsatisfiable_clique_times_out(self):
        topo = build_clique(6)
        out = simulate_traditional(topo, SchellingParams(2, 2, HALF, max_steps=200), 1)
        assert out.result is Outcome.TIMED_OUT

    @given(st.integers(1, 9), st.integers(0, 9), st.integers(0, 6), taus, st.integers(0, 999))
    @settings(max_examples=60)
    def test_clique_never_settles_late(self, a, b, vacant, tau, seed):
        topo = build_clique(a + b + vacant)
        out = simulate_traditional(topo, SchellingParams(a, b, tau, max_steps=200), seed)
        assert out.steps == 0 if out.result is Outcome.SATISFIED else out.result is Outcome.TIMED_OUT

    def test_clique_example_satisfied(self):
        out = simulate_traditional(build_clique(7), SchellingParams(4, 3, Threshold(1, 3)), 0)
        assert out.result is Outcome.SATISFIED and out.steps == 0

    @pytest.mark.parametrize("rejection", [True, False])
    def test_trace_replays(self, rejection):
        topo = build_lollipop(4, 12)
        params = SchellingParams(5, 5, HALF, max_steps=500)
        init = place_agents(topo, params, 4)
        out = simulate_traditional(topo, params, 4, TraceOptions(), initial=init, rejection=rejection)
        final = replay_traditional(topo, init, params.tau, out.trace)
        if out.result is Outcome.SATISFIED:
            assert count_unhappy(final, topo, params.tau) == 0
        assert len(out.trace) == out.steps + (1 if out.result is Outcome.SATISFIED else 0)

    def test_trace_options_mask_columns(self, tmp_path):
        topo = build_path(8)
        params = SchellingParams(3, 3, HALF, max_steps=100)
        out = simulate_traditional(topo, params, 2,
                                   TraceOptions(record_total_unhappy_per_step=False))
        assert all(row[1] is None for row in out.trace)
        path = tmp_path / "trace.csv"
        write_trace_csv(path, out.trace)
        assert path.read_text().splitlines()[0] == "step,total_unhappy,mover,from,to"

    def test_deterministic(self):
        topo = build_lollipop(5, 40)
        params = SchellingParams(14, 14, HALF)
        a = simulate_traditional(topo, params, 12, TraceOptions())
        b = simulate_traditional(topo, params, 12, TraceOptions())
        assert a.steps == b.steps and a.trace == b.trace

    def test_rejection_and_direct_sampling_agree_in_law(self):
        topo = build_lollipop(4, 8)
        params = SchellingParams(3, 3, HALF, max_steps=10**5)
        x = [simulate_traditional(topo, params, s).steps for s in range(3000)]
        y = [simulate_traditional(topo, params, s + 10**5, rejection=False).steps
             for s in range(3000)]
        assert ks_2samp(x, y).pvalue > 0.001

    def test_initial_mismatch(self):
        with pytest.raises(ValueError):
            simulate_traditional(build_path(4), SchellingParams(2, 1, HALF), 0,
                                 initial=Configuration.from_string("AB.."))


class TestCliqueRules:
    @pytest.mark.parametrize("a,b,tau,expected", [
        (2, 2, HALF, Outcome.UNSATISFIABLE),
        (2, 2, Threshold(1, 3), Outcome.SATISFIED),
        (5, 0, HALF, Outcome.SATISFIED),
        (1, 0, Threshold(1, 1), Outcome.SATISFIED),
        (3, 1, HALF, Outcome.UNSATISFIABLE),
    ])
    def test_decide(self, a, b, tau, expected):
        assert decide_clique(a, b, tau).result is expected

    @given(st.integers(0, 15), st.integers(0, 15), taus)
    def test_matches_full_recount(self, a, b, tau):
        if a + b == 0:
            return
        config = Configuration([1] * a + [-1] * b)
        assert clique_unhappy(a, b, tau) == count_unhappy(config, build_clique(a + b), tau)

    def test_approximate_rule_is_self_inclusive(self):
        # 2A/2B at 1/2: exact test says unhappy, self-inclusive test 2 < 0.5*4 says happy
        assert clique_unhappy(2, 2, HALF) == 4
        assert clique_unhappy(2, 2, HALF, approximate=True) == 0


class TestCountFirst:
    def test_counts_round_trip(self):
        spec = LollipopSpec(4, 5)
        config = Configuration.from_string("A.B." + "AB..B")
        for exact in (False, True):
            state = LollipopCounts.from_configuration(spec, config, exact)
            back = state.to_configuration()
            assert back.counts() == config.counts()
            assert back.to_string()[4:] == "AB..B"
            assert state.path_vacancies == 2
            assert state.clique_vacancies == 2

    @given(st.integers(2, 8), st.integers(1, 20), st.integers(0, 2**31), taus, st.booleans(),
           st.booleans())
    @settings(max_examples=150)
    def test_cache_coherence(self, k, length, seed, tau, exact, skip):
        rng = np.random.default_rng(seed)
        n = k + length
        agents = int(rng.integers(1, n))
        a = int(rng.integers(0, agents + 1))
        params = SchellingParams(a, agents - a, tau, max_steps=400)
        run = run_lollipop(LollipopSpec(k, length), params, seed, exact_bridge=exact,
                           skip_clique_internal=skip, record=True)
        replay_count_first(run, tau)
        assert run.max_evals_per_step <= 6

    def test_satisfied_means_no_unhappy(self):
        spec = LollipopSpec(6, 60)
        params = SchellingParams(20, 20, HALF)
        for seed in range(20):
            run = run_lollipop(spec, params, seed, exact_bridge=True)
            if run.outcome.result is Outcome.SATISFIED:
                final = run.final.to_configuration()
                assert count_unhappy(final, build_lollipop(6, 60), HALF) == 0

    def test_skip_internal_leaves_law_on_cross_moves(self):
        spec = LollipopSpec(5, 10)
        params = SchellingParams(3, 3, HALF, max_steps=10**5)
        counted = [simulate_lollipop_count_first(spec, params, s, exact_bridge=True).steps
                   for s in range(2000)]
        skipped = [simulate_lollipop_count_first(spec, params, s, exact_bridge=True,
                                                 skip_clique_internal=True).steps
                   for s in range(2000)]
        # dropping no-op moves can only shorten the count
        assert np.mean(skipped) <= np.mean(counted)

    def test_frozen_interior_returns_timeout(self):
        # unhappy 2A/2B inside the clique, happy full path: every legal move is clique-internal
        spec = LollipopSpec(6, 2)
        init = Configuration.from_string("AABB..AA")
        out = simulate_lollipop_count_first(spec, SchellingParams(4, 2, HALF, max_steps=1000), 0,
                                            initial=init)
        assert out.result is Outcome.TIMED_OUT

    def test_deterministic(self):
        spec = LollipopSpec(10, 90)
        params = SchellingParams(40, 40, HALF)
        a = run_lollipop(spec, params, 5, record=True)
        b = run_lollipop(spec, params, 5, record=True)
        assert np.array_equal(a.raw_trace, b.raw_trace)

    def test_trace_rows_use_vertex_ids(self):
        spec = LollipopSpec(4, 10)
        params = SchellingParams(4, 4, HALF, max_steps=200)
        out = simulate_lollipop_count_first(spec, params, 3, record=True, exact_bridge=True)
        for step, total, mover, src, dst in out.trace:
            if mover is None:
                continue
            for site in (src, dst):
                assert site == "clique" or 0 <= site < spec.vertex_count


class TestPath:
    def test_hand_derived_mean(self):
        # path of 3 with one A and one B: adjacent starts need 2 moves on average, split starts 0
        params = SchellingParams(1, 1, HALF)
        assert exact_expected_moves(build_path(3), params).mean_exact == pytest.approx(4 / 3)
        steps = [simulate_path(3, 1, 1, HALF, s).steps for s in range(20000)]
        se = np.std(steps) / math.sqrt(len(steps))
        assert abs(np.mean(steps) - 4 / 3) < 4 * se

    def test_initial(self):
        out = simulate_path(5, 2, 2, HALF, 0, initial=Configuration.from_string("AA.BB"))
        assert out.result is Outcome.SATISFIED and out.steps == 0

    def test_trace(self):
        out = simulate_path(12, 4, 4, HALF, 1, record=True)
        assert out.trace[-1][2] is None
        assert out.trace[0][0] == 0


class TestOracle:
    def test_path3(self):
        res = exact_expected_moves(build_path(3), SchellingParams(1, 1, HALF))
        assert str(res.mean_exact) == "4/3"
        assert res.expected_from("AB.") == pytest.approx(2.0)
        assert res.expected_from("A.B") == 0.0

    def test_unsatisfiable_clique(self):
        res = exact_expected_moves(build_clique(4), SchellingParams(2, 2, HALF))
        assert res.unsatisfiable and math.isinf(res.mean)

    def test_some_starts_never_settle(self):
        res = exact_expected_moves(build_lollipop(3, 7), SchellingParams(4, 4, HALF))
        assert not res.unsatisfiable
        assert math.isinf(res.mean)
        assert sum(math.isinf(v) for v in res.per_state.values()) == 1108

    def test_exact_matches_float(self):
        res = exact_expected_moves(build_lollipop(3, 3), SchellingParams(2, 2, HALF), exact=True)
        assert float(res.mean_exact) == pytest.approx(res.mean, rel=1e-12)
        for key, value in res.per_state_exact.items():
            assert float(value) == pytest.approx(res.per_state[key], rel=1e-10, abs=1e-12)

    def test_large_chain_uses_iterative_solver(self):
        res = exact_expected_moves(build_lollipop(4, 8), SchellingParams(3, 3, HALF))
        assert res.state_count == 18480
        assert res.mean == pytest.approx(2.7794, abs=1e-3)

    def test_cap(self):
        with pytest.raises(ResourceCapError):
            exact_expected_moves(build_lollipop(10, 20), SchellingParams(8, 8, HALF), max_states=1000)
