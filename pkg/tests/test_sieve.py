"""Tests for the sieve polynomial engine."""

import math
import time
import tracemalloc
from itertools import chain, combinations

import numpy as np
import pytest
from pydantic import ValidationError

from tests.conftest import complete_graph, cycle_graph, path_graph, star_graph
from treesieve import field, sieve
from treesieve.graph import Bipartition, Graph
from treesieve.oracle import brute_poly_eval, brute_subset_eval
from treesieve.sieve import (
    EvaluationPoint,
    SieveInstance,
    dp_evaluate,
    evaluate_P,
    evaluate_weighted,
    gray_code_subsets,
    has_weight_at_least,
    label_sums,
    to_gray_code,
)


def subsets(r):
    labels = range(1, r + 1)
    return chain.from_iterable(combinations(labels, size) for size in range(r + 1))


def xor_range(values, lo, hi):
    total = 0
    for v in values[lo:hi + 1]:
        total ^= v
    return total


SMALL_GRAPHS = {
    "p3": path_graph(3),
    "k3": complete_graph(3),
    "c4": cycle_graph(4),
    "star3": star_graph(3),
    "paw": Graph.from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)]),
}


class TestGrayCode:
    """Test Gray-code subset enumeration."""

    def test_visits_every_mask_once(self):
        masks = [mask for mask, _ in gray_code_subsets(4)]
        assert sorted(masks) == list(range(16))

    def test_single_flips(self):
        previous = None
        for mask, flipped in gray_code_subsets(5):
            if previous is None:
                assert flipped is None
            else:
                assert mask ^ previous == 1 << (flipped - 1)
            previous = mask

    def test_segment(self):
        segment = list(gray_code_subsets(4, start=5, stop=9))
        assert [m for m, _ in segment] == [to_gray_code(i) for i in range(5, 9)]
        assert segment[0][1] is None


class TestLabelSums:
    """Incremental label sums match sums computed from scratch."""

    def test_toggle_matches_scratch(self, c4, rng):
        point = EvaluationPoint.sample(c4, 4, rng)
        sums = label_sums(point, [])
        for mask, flipped in gray_code_subsets(4):
            if flipped is not None:
                sums.toggle(flipped)
            fresh = label_sums(point, [t + 1 for t in range(4) if mask >> t & 1])
            assert sums.vertex == fresh.vertex
            assert sums.edge == fresh.edge
            assert sums.labels == fresh.labels

    def test_label_out_of_range(self, p3, rng):
        point = EvaluationPoint.sample(p3, 3, rng)
        with pytest.raises(ValueError):
            label_sums(point, [4])


class TestSieveInstance:
    """Test instance validation."""

    def test_too_many_leaves(self, p5):
        with pytest.raises(ValidationError):
            SieveInstance(graph=p5, part=Bipartition.uniform(5, 1), k=3, l=3, r=4)

    def test_budget_below_leaves(self, p5):
        with pytest.raises(ValidationError):
            SieveInstance(graph=p5, part=Bipartition.uniform(5, 1), k=4, l=3, r=2)

    def test_partition_size(self, p5):
        with pytest.raises(ValidationError):
            SieveInstance(graph=p5, part=Bipartition.uniform(4, 1), k=3, l=2, r=3)

    def test_point_budget_mismatch(self, p3, rng):
        inst = SieveInstance(graph=p3, part=Bipartition.uniform(3, 1), k=3, l=2, r=3)
        with pytest.raises(ValueError):
            evaluate_P(inst, EvaluationPoint.sample(p3, 4, rng))


class TestEngineAgainstOracle:
    """Dynamic program versus direct summation over walks."""

    @pytest.mark.parametrize("name", sorted(SMALL_GRAPHS))
    @pytest.mark.parametrize("k,l", [(3, 2), (4, 2), (4, 3)])
    def test_every_label_set(self, name, k, l):
        g = SMALL_GRAPHS[name]
        r = min(k + -(-l // 2), 4)
        rng = np.random.default_rng([k, l, g.n, g.m])
        for _ in range(2):
            part = Bipartition.random(g.n, rng)
            inst = SieveInstance(graph=g, part=part, k=k, l=l, r=r)
            point = EvaluationPoint.sample(g, r, rng)
            for labels in subsets(r):
                assert dp_evaluate(inst, point, labels) == brute_subset_eval(g, part, k, l, r, point, labels)

    @pytest.mark.parametrize("name", sorted(SMALL_GRAPHS))
    def test_polynomial_value(self, name):
        g = SMALL_GRAPHS[name]
        rng = np.random.default_rng(g.m)
        for k, l in [(3, 2), (4, 2), (4, 3)]:
            r = k + -(-l // 2)
            part = Bipartition.random(g.n, rng)
            inst = SieveInstance(graph=g, part=part, k=k, l=l, r=r)
            point = EvaluationPoint.sample(g, r, rng)
            expected = xor_range(brute_poly_eval(g, part, k, l, r, point), 2, r)
            assert evaluate_P(inst, point) == expected

    @pytest.mark.slow
    def test_exhaustive_atlas(self):
        import networkx as nx

        for atlas in nx.graph_atlas_g()[1:]:
            if atlas.number_of_nodes() > 5 or not nx.is_connected(atlas):
                continue
            g = Graph.from_networkx(atlas)
            for k in (3, 4):
                for l in range(2, k):
                    r = min(k + -(-l // 2), 6)
                    rng = np.random.default_rng([g.n, g.m, k, l])
                    for _ in range(8):
                        part = Bipartition.random(g.n, rng)
                        inst = SieveInstance(graph=g, part=part, k=k, l=l, r=r)
                        for _ in range(20):
                            point = EvaluationPoint.sample(g, r, rng)
                            for labels in subsets(r):
                                assert dp_evaluate(inst, point, labels) == brute_subset_eval(
                                    g, part, k, l, r, point, labels
                                )


class TestEvaluateP:
    """Test the polynomial value itself."""

    def test_path_of_three_is_found(self, p3, rng):
        inst = SieveInstance(graph=p3, part=Bipartition.uniform(3, 1), k=3, l=2, r=3)
        assert evaluate_P(inst, EvaluationPoint.sample(p3, 3, rng)) != 0

    def test_budget_too_small_hides_tree(self, p3, rng):
        """All-V2 P3 has four labellable elements."""
        inst = SieveInstance(graph=p3, part=Bipartition.uniform(3, 2), k=3, l=2, r=3)
        assert evaluate_P(inst, EvaluationPoint.sample(p3, 3, rng)) == 0

    def test_star_has_no_long_path(self, star3, rng):
        for _ in range(5):
            part = Bipartition.random(4, rng)
            inst = SieveInstance(graph=star3, part=part, k=4, l=2, r=6)
            assert evaluate_P(inst, EvaluationPoint.sample(star3, 6, rng)) == 0

    def test_cycle_has_no_claw(self, c4, rng):
        inst = SieveInstance(graph=c4, part=Bipartition.random(4, rng), k=4, l=3, r=6)
        assert evaluate_P(inst, EvaluationPoint.sample(c4, 6, rng)) == 0

    def test_triangle_is_not_a_path_of_four(self, k3, rng):
        """K3 only has non-simple walks on four nodes; they cancel."""
        inst = SieveInstance(graph=k3, part=Bipartition.random(3, rng), k=4, l=2, r=6)
        assert evaluate_P(inst, EvaluationPoint.sample(k3, 6, rng)) == 0

    def test_segments_combine(self, rng):
        g = path_graph(5)
        inst = SieveInstance(graph=g, part=Bipartition.random(5, rng), k=4, l=2, r=5)
        point = EvaluationPoint.sample(g, 5, rng)
        full = evaluate_P(inst, point)
        assert evaluate_P(inst, point, 0, 13) ^ evaluate_P(inst, point, 13) == full

    @pytest.mark.slow
    def test_hit_rate_on_a_path(self, rng):
        """With V1 on the odd vertices P5 has four labellable elements; P is non-zero on most points."""
        g = path_graph(5)
        inst = SieveInstance(graph=g, part=Bipartition.from_v1(5, [1, 3]), k=5, l=2, r=4)
        points = 200
        hits = sum(1 for _ in range(points) if evaluate_P(inst, EvaluationPoint.sample(g, 4, rng)))
        assert hits / points >= 0.5 - 3 * math.sqrt(0.25 / points)

    @pytest.mark.slow
    @pytest.mark.parametrize("name,k,l", [("star3", 4, 2), ("c4", 4, 3), ("k3", 4, 2)])
    def test_identically_zero_without_witness(self, name, k, l, rng):
        g = SMALL_GRAPHS[name]
        for _ in range(100):
            inst = SieveInstance(graph=g, part=Bipartition.random(g.n, rng), k=k, l=l, r=5)
            assert evaluate_P(inst, EvaluationPoint.sample(g, 5, rng)) == 0

    @pytest.mark.parametrize("seed", range(5))
    def test_invariant_under_vertex_renaming(self, seed):
        rng = np.random.default_rng(seed)
        g = SMALL_GRAPHS["paw"]
        perm = rng.permutation(g.n).tolist()
        h = g.relabel(perm)
        part = Bipartition.random(g.n, rng)
        point = EvaluationPoint.sample(g, 5, rng)
        x, y_edge = [0] * h.m, [()] * h.m
        for e, (u, v) in enumerate(g.edges):
            f = h.edge_id(perm[u], perm[v])
            x[f], y_edge[f] = point.x[e], point.y_edge[e]
        z, y_vertex, side = [0] * h.n, [()] * h.n, [0] * h.n
        for v in range(g.n):
            z[perm[v]], y_vertex[perm[v]], side[perm[v]] = point.z[v], point.y_vertex[v], part.side[v]
        renamed = EvaluationPoint(r=5, x=tuple(x), y_vertex=tuple(y_vertex), y_edge=tuple(y_edge), z=tuple(z))
        for k, l in [(3, 2), (4, 2), (4, 3)]:
            original = evaluate_P(SieveInstance(graph=g, part=part, k=k, l=l, r=5), point)
            moved = evaluate_P(SieveInstance(graph=h, part=Bipartition(side=tuple(side)), k=k, l=l, r=5), renamed)
            assert moved == original


class TestWeighted:
    """Test the weighted evaluation."""

    def test_unit_weights_concentrate_on_k(self, rng):
        g = path_graph(4).with_weights([1, 1, 1, 1])
        inst = SieveInstance(graph=g, part=Bipartition.uniform(4, 1), k=3, l=2, r=3)
        point = EvaluationPoint.sample(g, 3, rng)
        coefficients = evaluate_weighted(inst, point, 3)
        assert len(coefficients) == 4
        assert coefficients[:3] == [0, 0, 0]
        assert coefficients[3] == evaluate_P(inst, point)
        assert has_weight_at_least(coefficients, 3)

    def test_heavy_vertex_raises_degree(self, rng):
        g = path_graph(3).with_weights([1, 2, 1])
        inst = SieveInstance(graph=g, part=Bipartition.uniform(3, 1), k=3, l=2, r=3)
        coefficients = evaluate_weighted(inst, EvaluationPoint.sample(g, 3, rng), 3)
        assert coefficients[4] != 0
        assert not any(coefficients[:4])
        assert has_weight_at_least(coefficients, 4)
        assert not has_weight_at_least(coefficients, 5)

    def test_requires_weights(self, p3, rng):
        inst = SieveInstance(graph=p3, part=Bipartition.uniform(3, 1), k=3, l=2, r=3)
        with pytest.raises(ValueError, match="weights"):
            evaluate_weighted(inst, EvaluationPoint.sample(p3, 3, rng), 3)

    def test_cap_below_k(self, rng):
        g = path_graph(3).with_weights([1, 1, 1])
        inst = SieveInstance(graph=g, part=Bipartition.uniform(3, 1), k=3, l=2, r=3)
        with pytest.raises(ValueError, match="weight_cap"):
            evaluate_weighted(inst, EvaluationPoint.sample(g, 3, rng), 2)

    def test_coefficients_reproduce_a_fresh_eta(self, rng):
        g = path_graph(4).with_weights([1, 2, 1, 3])
        inst = SieveInstance(graph=g, part=Bipartition.from_v1(4, [1, 2]), k=3, l=2, r=3)
        point = EvaluationPoint.sample(g, 3, rng)
        coefficients = evaluate_weighted(inst, point, 3)
        eta = field.sample(rng)
        value = 0
        for d, c in enumerate(coefficients):
            value ^= field.mul(c, field.power(eta, d))
        assert value == evaluate_P(inst, point.with_eta(eta))
        assert any(coefficients)


class TestScaling:
    """Work doubles per extra label while memory stays flat."""

    @staticmethod
    def _instance(r):
        g = path_graph(6)
        part = Bipartition.random(6, np.random.default_rng(3))
        return SieveInstance(graph=g, part=part, k=5, l=2, r=r), EvaluationPoint.sample(g, r, np.random.default_rng(r))

    def test_one_dynamic_program_per_label_set(self, monkeypatch):
        calls = []
        original = sieve._run

        def counting(inst, point, sums):
            calls.append(sums.mask)
            return original(inst, point, sums)

        monkeypatch.setattr(sieve, "_run", counting)
        inst, point = self._instance(6)
        evaluate_P(inst, point)
        assert sorted(calls) == list(range(1, 64))

    def test_peak_memory_does_not_follow_subset_count(self):
        peaks = []
        for r in (6, 7):
            inst, point = self._instance(r)
            tracemalloc.start()
            evaluate_P(inst, point)
            peaks.append(tracemalloc.get_traced_memory()[1])
            tracemalloc.stop()
        assert peaks[1] < 1.5 * peaks[0]

    @pytest.mark.slow
    def test_time_ratio_per_extra_label(self):
        times = []
        for r in (8, 9):
            inst, point = self._instance(r)
            best = math.inf
            for _ in range(3):
                started = time.perf_counter()
                evaluate_P(inst, point)
                best = min(best, time.perf_counter() - started)
            times.append(best)
        assert 1.6 <= times[1] / times[0] <= 2.6
