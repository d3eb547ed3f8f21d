import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lollipop_schelling.core import Configuration, SchellingParams, Threshold
from lollipop_schelling.qubo import (QuboProblem, brute_force_minimize, build_cost_function,
                                     decode_bits, encode_configuration, encode_qubo,
                                     penalty_weight)
from lollipop_schelling.topology import (ResourceCapError, build_clique, build_grid,
                                         build_lollipop, build_path)

HALF = Threshold(1, 2)


def _all_configs(n, a, b):
    for apos in itertools.combinations(range(n), a):
        rest = [v for v in range(n) if v not in apos]
        for bpos in itertools.combinations(rest, b):
            cells = np.zeros(n, dtype=np.int8)
            cells[list(apos)] = 1
            cells[list(bpos)] = -1
            yield Configuration(cells)


class TestCost:
    def test_counts_mixed_edges(self):
        # every A-B edge contributes 4, same-type and vacant edges 0
        topo = build_path(4)
        assert build_cost_function(topo, Configuration.from_string("ABAB")) == 12
        assert build_cost_function(topo, Configuration.from_string("AA.B")) == 0
        assert build_cost_function(topo, Configuration.from_string("AAB.")) == 4


class TestEncoding:
    @given(st.text(alphabet="AB.", min_size=1, max_size=12))
    def test_round_trip(self, text):
        c = Configuration.from_string(text)
        assert decode_bits(encode_configuration(c)) == c

    def test_invalid_pattern(self):
        assert decode_bits("0110") is None

    @pytest.mark.parametrize("rows,cols,qubits", [(3, 3, 18), (4, 4, 32), (2, 5, 20)])
    def test_qubit_count(self, rows, cols, qubits):
        q, report = encode_qubo(build_grid(rows, cols), SchellingParams(2, 2, HALF))
        assert q.num_qubits == report.num_qubits == qubits
        assert report.term_count == len(q.terms)

    @pytest.mark.parametrize("topo", [build_path(5), build_lollipop(3, 2), build_grid(2, 2),
                                      build_clique(4)], ids=["path5", "lolli32", "grid22", "k4"])
    def test_energy_equals_cost_on_feasible(self, topo):
        n = topo.vertex_count
        for a in range(n + 1):
            for b in range(n + 1 - a):
                if a + b == 0:
                    continue
                q, _ = encode_qubo(topo, SchellingParams(a, b, HALF))
                for c in _all_configs(n, a, b):
                    assert q.energy(encode_configuration(c)) == build_cost_function(topo, c)

    @given(st.integers(0, 2**12 - 1))
    @settings(max_examples=200)
    def test_infeasible_costs_more(self, k):
        topo = build_lollipop(3, 3)
        params = SchellingParams(2, 2, HALF)
        q, _ = encode_qubo(topo, params)
        bits = format(k, "012b")
        config = decode_bits(bits)
        worst = max(build_cost_function(topo, c) for c in _all_configs(6, 2, 2))
        if config is None or config.counts() != (2, 2):
            assert q.energy(bits) > worst

    def test_matrix_energy_agree(self):
        q, _ = encode_qubo(build_path(4), SchellingParams(1, 2, HALF))
        W = q.matrix()
        rng = np.random.default_rng(0)
        for _ in range(50):
            z = rng.integers(0, 2, q.num_qubits)
            assert int(z @ W @ z) + q.offset == q.energy(z)

    def test_penalty_exceeds_cost_span(self):
        topo = build_clique(5)
        assert penalty_weight(topo) > 12 * topo.edge_count

    def test_json_round_trip(self):
        q, _ = encode_qubo(build_path(3), SchellingParams(1, 1, HALF))
        back = QuboProblem.from_json(q.to_json())
        assert back.terms == q.terms and back.offset == q.offset

    def test_quadratic_term_growth(self):
        _, small = encode_qubo(build_clique(10), SchellingParams(4, 4, HALF))
        _, large = encode_qubo(build_clique(100), SchellingParams(40, 40, HALF))
        assert large.term_count / small.term_count >= 50

    def test_vertex_cap(self):
        with pytest.raises(ResourceCapError):
            encode_qubo(build_path(50), SchellingParams(1, 1, HALF), max_vertices=10)


class TestBruteForce:
    @pytest.mark.parametrize("config", ["AB.", "A.B.", "AAB."])
    def test_minimum_is_feasible_optimum(self, config):
        c = Configuration.from_string(config)
        topo = build_path(len(config))
        a, b = c.counts()
        q, _ = encode_qubo(topo, SchellingParams(a, b, HALF))
        bits, energy = brute_force_minimize(q)
        best = decode_bits(bits)
        assert best is not None and best.counts() == (a, b)
        assert energy == min(build_cost_function(topo, x) for x in _all_configs(len(config), a, b))
        assert energy == q.energy(bits)

    def test_tie_break_smallest_bitstring(self):
        q = QuboProblem(2, ((0, 0, 0),), 0)
        assert brute_force_minimize(q) == ("00", 0)

    def test_cap(self):
        q, _ = encode_qubo(build_grid(4, 4), SchellingParams(2, 2, HALF))
        with pytest.raises(ResourceCapError):
            brute_force_minimize(q)
