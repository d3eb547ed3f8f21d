import numpy as np
import pytest
from hypothesis import given, strategies as st

from lollipop_schelling.topology import (Kind, LollipopSpec, ResourceCapError, Topology,
                                         build_clique, build_grid, build_hypercube,
                                         build_lollipop, build_path, build_welded_tree,
                                         from_edges)


class TestLollipop:
    def test_layout(self):
        g = build_lollipop(4, 3)
        assert g.kind is Kind.LOLLIPOP
        assert g.vertex_count == 7
        assert g.lollipop == LollipopSpec(4, 3)
        assert g.lollipop.bridge == (0, 4)
        assert sorted(g.neighbors(0).tolist()) == [1, 2, 3, 4]
        assert sorted(g.neighbors(4).tolist()) == [0, 5]
        assert g.neighbors(6).tolist() == [5]

    @given(st.integers(1, 25), st.integers(0, 25))
    def test_edge_count(self, k, m):
        g = build_lollipop(k, m)
        g.check()
        assert g.edge_count == k * (k - 1) // 2 + m
        assert g.is_connected()

    def test_no_path_has_no_bridge(self):
        assert build_lollipop(5, 0).lollipop.bridge is None

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            build_lollipop(0, 3)


class TestFamilies:
    def test_clique(self):
        g = build_clique(6)
        assert (g.degrees() == 5).all()

    def test_path(self):
        g = build_path(5)
        assert g.degrees().tolist() == [1, 2, 2, 2, 1]

    @pytest.mark.parametrize("rows,cols", [(1, 1), (2, 3), (3, 3), (4, 4), (1, 7)])
    def test_grid(self, rows, cols):
        g = build_grid(rows, cols)
        g.check()
        assert g.edge_count == rows * (cols - 1) + cols * (rows - 1)

    @pytest.mark.parametrize("n", [1, 2, 3, 6])
    def test_hypercube(self, n):
        g = build_hypercube(n)
        g.check()
        assert g.vertex_count == 2 ** n
        assert (g.degrees() == n).all()
        for v in range(g.vertex_count):
            assert all(bin(v ^ int(u)).count("1") == 1 for u in g.neighbors(v))

    @pytest.mark.parametrize("rows,cols", [(2, 2), (3, 4)])
    def test_diagonal_grid(self, rows, cols):
        g = build_grid(rows, cols, diagonal=True)
        g.check()
        assert g.edge_count == rows * (cols - 1) + cols * (rows - 1) + 2 * (rows - 1) * (cols - 1)

    def test_hypercube_cap(self):
        with pytest.raises(ResourceCapError):
            build_hypercube(30)

    @pytest.mark.parametrize("h", [1, 2, 4])
    def test_welded_tree(self, h):
        g, spec = build_welded_tree(h, seed=0)
        g.check()
        t = 2 ** (h + 1) - 1
        assert g.vertex_count == 2 * t
        assert (spec.entrance, spec.exit) == (0, t)
        assert g.degree(spec.entrance) == 2 and g.degree(spec.exit) == 2
        # every leaf has its tree parent plus one weld partner
        first_leaf = 2 ** h - 1
        for leaf in range(first_leaf, t):
            assert g.degree(leaf) == 2
        assert sorted(spec.weld) == list(range(t + first_leaf, 2 * t))
        assert g.is_connected()

    def test_welded_tree_seeded(self):
        assert build_welded_tree(4, seed=9)[1] == build_welded_tree(4, seed=9)[1]


class TestTopologyObject:
    def test_arrays_read_only(self):
        g = build_path(4)
        with pytest.raises(ValueError):
            g.indices[0] = 3

    def test_check_rejects_self_loop(self):
        g = Topology(Kind.GENERAL, 2, np.array([0, 1, 2]), np.array([0, 0]), {})
        with pytest.raises(ValueError):
            g.check()

    def test_from_edges_rejects_bad_vertex(self):
        with pytest.raises(ValueError):
            from_edges(3, [(0, 5)])

    @given(st.integers(1, 8), st.integers(0, 8))
    def test_json_round_trip(self, k, m):
        g = build_lollipop(k, m)
        back = Topology.from_json(g.to_json())
        assert back.vertex_count == g.vertex_count
        assert back.edges() == g.edges()
