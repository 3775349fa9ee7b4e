"""Tests for triangle elimination and the subcubic k-path driver."""

import networkx as nx
import numpy as np
import pytest

from tests.conftest import complete_graph, path_graph, star_graph
from treesieve.errors import DegreeBoundError
from treesieve.graph import Graph
from treesieve.models import DetectionPlan
from treesieve.oracle import brute_kpath, brute_weighted_path
from treesieve.preprocess import eliminate_triangles, kpath_subcubic


def random_subcubic(n: int, seed: int) -> Graph:
    rng = np.random.default_rng(seed)
    g = nx.random_regular_graph(3, n, seed=seed)
    g.remove_edges_from([e for e in list(g.edges) if rng.random() < 0.2])
    return Graph.from_networkx(g)


def plan(**fields):
    return DetectionPlan(k=3, l=2, **fields)


class TestEliminateTriangles:
    """Test eliminate_triangles."""

    def test_triangle_becomes_heavy_vertex(self, k3):
        reduced, trace = eliminate_triangles(k3)
        assert reduced.n == 1
        assert reduced.weights == (3,)
        assert len(trace.steps) == 1
        assert trace.steps[0].triangle == (1, 2, 3)
        assert trace.steps[0].merged_into == 1
        assert trace.vertex_map == [[1, 2, 3]]

    def test_triangle_free_input_unchanged(self, p5):
        reduced, trace = eliminate_triangles(p5)
        assert reduced.adjacency == p5.adjacency
        assert reduced.weights == (1, 1, 1, 1, 1)
        assert trace.steps == []

    def test_k4(self):
        reduced, trace = eliminate_triangles(complete_graph(4))
        assert reduced.n == 2
        assert reduced.weights == (3, 1)
        assert reduced.m == 1
        assert trace.steps[0].triangle == (1, 2, 3)

    def test_prism(self):
        edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)]
        reduced, trace = eliminate_triangles(Graph.from_edges(6, edges))
        assert len(trace.steps) == 2
        assert reduced.n == 2
        assert reduced.weights == (5, 1)
        assert reduced.m == 1

    def test_output_is_triangle_free(self):
        for seed in range(10):
            reduced, _ = eliminate_triangles(random_subcubic(10, seed))
            assert sum(nx.triangles(reduced.to_networkx()).values()) == 0

    def test_weights_are_preserved(self):
        g = random_subcubic(8, 3)
        reduced, trace = eliminate_triangles(g)
        assert sum(reduced.weights) == g.n
        assert sorted(v for group in trace.vertex_map for v in group) == list(range(1, g.n + 1))

    def test_degree_bound(self):
        with pytest.raises(DegreeBoundError):
            eliminate_triangles(star_graph(4))

    def test_trace_serializes(self, k3):
        _, trace = eliminate_triangles(k3)
        assert '"merged_into": 1' in trace.model_dump_json(indent=2)


class TestPathEquivalence:
    """k-paths survive elimination as heavy short paths."""

    @pytest.mark.parametrize("seed", range(15))
    def test_random_graphs(self, seed):
        g = random_subcubic(8, seed)
        reduced, _ = eliminate_triangles(g)
        for k in range(1, g.n + 1):
            assert brute_kpath(g, k) == brute_weighted_path(reduced, reduced.weights, k, k)

    @pytest.mark.slow
    def test_many_random_graphs(self):
        for seed in range(200):
            n = 4 + 2 * (seed % 4)
            g = random_subcubic(n, seed)
            reduced, _ = eliminate_triangles(g)
            for k in range(1, n + 1):
                assert brute_kpath(g, k) == brute_weighted_path(reduced, reduced.weights, k, k)


class TestKpathSubcubic:
    """Test kpath_subcubic."""

    def test_heavy_vertex(self, k3):
        verdict = kpath_subcubic(k3, 3, plan())
        assert verdict.yes
        assert verdict.trials_run == 0
        assert verdict.strategy_detail["decided_by"] == "heavy vertex"

    def test_weighted_sieve(self):
        g = Graph.from_edges(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)])
        verdict = kpath_subcubic(g, 5, plan(seed=1, confidence_boost=2))
        assert verdict.yes
        assert verdict.strategy_detail["contractions"] == 1
        assert verdict.strategy_detail["nodes"] == 3

    def test_triangle_free_path(self, p5):
        assert kpath_subcubic(p5, 5, plan(seed=2, confidence_boost=2)).yes

    def test_star(self, star3):
        assert not kpath_subcubic(star3, 4, plan(seed=3)).yes

    def test_k_exceeds_n(self, p3):
        assert not kpath_subcubic(p3, 4, plan()).yes

    def test_degree_bound(self):
        with pytest.raises(DegreeBoundError):
            kpath_subcubic(star_graph(4), 3, plan())

    def test_nonpositive_k(self, p3):
        with pytest.raises(ValueError):
            kpath_subcubic(p3, 0, plan())

    @pytest.mark.slow
    def test_agrees_with_brute_force(self):
        for seed in range(20):
            g = random_subcubic(8, seed)
            for k in range(3, g.n + 1):
                assert kpath_subcubic(g, k, plan(seed=seed, confidence_boost=4)).yes == brute_kpath(g, k)
