"""Exhaustive reference implementations.

Everything here is exponential and guarded: asking for an instance above a
guard raises EnumerationGuardError instead of truncating.
"""

from itertools import combinations, permutations, product
from math import comb
from typing import Iterable, Iterator, Optional, Sequence

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from treesieve import field
from treesieve.errors import EnumerationGuardError
from treesieve.graph import Bipartition, Graph
from treesieve.sieve import EvaluationPoint

SUBSET_GUARD = 10**7
WALK_MAX_K = 5
WALK_MAX_N = 6
SPANNING_MAX_N = 8
PATH_MAX_N = 12


class RootedWalk(BaseModel):
    """Branching walk: rooted tree on nodes 0..k-1 (root 0) and its image in the graph."""
    model_config = ConfigDict(frozen=True)

    parent: tuple[Optional[int], ...]
    image: tuple[int, ...]

    @model_validator(mode="after")
    def _check_tree(self) -> "RootedWalk":
        if len(self.parent) != len(self.image):
            raise ValueError("parent and image lengths differ")
        if self.parent and self.parent[0] is not None:
            raise ValueError("node 0 must be the root")
        for u, p in enumerate(self.parent[1:], start=1):
            if p is None or not 0 <= p < u:
                raise ValueError(f"node {u} has invalid parent {p}")
        return self

    @property
    def k(self) -> int:
        return len(self.image)

    def children(self, u: int) -> list[int]:
        return [c for c, p in enumerate(self.parent) if p == u]

    @property
    def leaves(self) -> list[int]:
        return [u for u in range(1, self.k) if not self.children(u)]

    @property
    def internal(self) -> list[int]:
        return [u for u in range(self.k) if self.children(u)]

    def depth(self, u: int) -> int:
        d = 0
        while self.parent[u] is not None:
            u = self.parent[u]
            d += 1
        return d

    def is_homomorphism(self, g: Graph) -> bool:
        return all(g.has_edge(self.image[p], self.image[u]) for u, p in enumerate(self.parent) if p is not None)

    def is_weakly_simple(self) -> bool:
        for u in range(self.k):
            images = [self.image[c] for c in self.children(u)]
            if len(set(images)) != len(images):
                return False
        return True

    def is_uturn_free(self) -> bool:
        for u, p in enumerate(self.parent):
            if p is not None and any(self.image[c] == self.image[p] for c in self.children(u)):
                return False
        return True

    def is_properly_ordered(self) -> bool:
        keys = [(self.depth(u), -1 if p is None else p, self.image[u]) for u, p in enumerate(self.parent)]
        return all(a < b for a, b in zip(keys, keys[1:]))

    def is_admissible(self) -> bool:
        return self.is_weakly_simple() and self.is_uturn_free() and self.is_properly_ordered()

    def is_simple(self) -> bool:
        return len(set(self.image)) == self.k

    def labellable(self, part: Bipartition) -> list[tuple[str, int]]:
        """("node", u) for leaves and internal V1 nodes, ("edge", u) for the V2V2 edge above u."""
        out = [("node", u) for u in self.leaves]
        out += [("node", u) for u in self.internal if part.in_v1(self.image[u])]
        out += [
            ("edge", u)
            for u, p in enumerate(self.parent)
            if p is not None and not part.in_v1(self.image[u]) and not part.in_v1(self.image[p])
        ]
        return sorted(out)


def _subtrees(g: Graph, a: int, parent: Optional[int], size: int) -> Iterator[tuple]:
    if size == 1:
        yield (a, ())
        return
    candidates = [b for b in g.adjacency[a] if b != parent]
    for kids in _forests(g, a, candidates, 0, size - 1):
        yield (a, kids)


def _forests(g: Graph, a: int, candidates: list[int], start: int, remaining: int) -> Iterator[tuple]:
    if remaining == 0:
        yield ()
        return
    for pos in range(start, len(candidates)):
        b = candidates[pos]
        for size in range(1, remaining + 1):
            for sub in _subtrees(g, b, a, size):
                for rest in _forests(g, a, candidates, pos + 1, remaining - size):
                    yield (sub,) + rest


def _flatten(nested: tuple) -> RootedWalk:
    parent: list[Optional[int]] = [None]
    image = [nested[0]]
    queue = [(0, nested)]
    while queue:
        index, (_, kids) = queue.pop(0)
        for kid in kids:
            parent.append(index)
            image.append(kid[0])
            queue.append((len(image) - 1, kid))
    return RootedWalk(parent=tuple(parent), image=tuple(image))


def _admissible_walks(g: Graph, k: int, l: int) -> Iterator[RootedWalk]:
    if k > WALK_MAX_K or g.n > WALK_MAX_N:
        raise EnumerationGuardError(f"walk enumeration limited to k<={WALK_MAX_K}, n<={WALK_MAX_N}")
    for v in range(g.n):
        for nested in _subtrees(g, v, None, k):
            if len(nested[1]) < 2:
                continue
            walk = _flatten(nested)
            if len(walk.leaves) == l:
                yield walk


def enumerate_admissible_walks(g: Graph, part: Bipartition, k: int, l: int, i: int) -> list[RootedWalk]:
    """All admissible walks with k nodes, l leaves, i labellable elements and a branching root."""
    return [w for w in _admissible_walks(g, k, l) if len(w.labellable(part)) == i]


def _y(g: Graph, walk: RootedWalk, point: EvaluationPoint, element: tuple[str, int], t: int) -> int:
    kind, u = element
    if kind == "node":
        return point.y_vertex[walk.image[u]][t - 1]
    return point.y_edge[g.edge_id(walk.image[walk.parent[u]], walk.image[u])][t - 1]


def _base_monomial(g: Graph, walk: RootedWalk, point: EvaluationPoint) -> int:
    value = point.z[walk.image[0]]
    for u, p in enumerate(walk.parent):
        if p is not None:
            value = field.mul(value, point.x[g.edge_id(walk.image[p], walk.image[u])])
    if point.eta is not None:
        weight = sum(g.weight(v) for v in walk.image)
        value = field.mul(value, field.power(point.eta, weight))
    return value


def _labelled_sum(g: Graph, walk: RootedWalk, point: EvaluationPoint, elements, labelings) -> int:
    base = _base_monomial(g, walk, point)
    total = 0
    for labeling in labelings:
        value = base
        for element, t in zip(elements, labeling):
            value = field.mul(value, _y(g, walk, point, element, t))
        total ^= value
    return total


def _bijective_eval(g, part, k, l, r, point, walks: Iterable[RootedWalk]) -> list[int]:
    out = [0] * (r + 1)
    for walk in walks:
        elements = walk.labellable(part)
        i = len(elements)
        if 2 <= i <= r:
            out[i] ^= _labelled_sum(g, walk, point, elements, permutations(range(1, i + 1)))
    return out


def brute_poly_eval(
    g: Graph, part: Bipartition, k: int, l: int, r: int, point: EvaluationPoint
) -> list[int]:
    """P_i for i in 0..r by summing monomials over walks and bijective labelings."""
    return _bijective_eval(g, part, k, l, r, point, _admissible_walks(g, k, l))


def nonsimple_partial_sum(
    g: Graph, part: Bipartition, k: int, l: int, r: int, point: EvaluationPoint
) -> list[int]:
    """Same sum as brute_poly_eval restricted to non-simple walks; always zero."""
    walks = (w for w in _admissible_walks(g, k, l) if not w.is_simple())
    return _bijective_eval(g, part, k, l, r, point, walks)


def brute_subset_eval(
    g: Graph, part: Bipartition, k: int, l: int, r: int, point: EvaluationPoint, labels: Iterable[int]
) -> list[int]:
    """Sum over walks and every labeling into ``labels`` (not necessarily bijective)."""
    labels = sorted(set(labels))
    out = [0] * (r + 1)
    for walk in _admissible_walks(g, k, l):
        elements = walk.labellable(part)
        i = len(elements)
        if i <= r:
            out[i] ^= _labelled_sum(g, walk, point, elements, product(labels, repeat=i))
    return out


def _is_tree(edges: Sequence[tuple[int, int]]) -> bool:
    h = nx.Graph(edges)
    return h.number_of_edges() == len(edges) and nx.is_tree(h)


def _spanning_trees(g: Graph, vertices: Sequence[int]) -> Iterator[list[tuple[int, int]]]:
    """Spanning trees of the subgraph induced by ``vertices`` as host edge lists."""
    sub = g.to_networkx().subgraph(vertices)
    if not nx.is_connected(sub):
        return
    for tree in nx.SpanningTreeIterator(sub):
        yield sorted((min(u, v), max(u, v)) for u, v in tree.edges)


def _leaf_count(edges: Sequence[tuple[int, int]]) -> int:
    degree: dict[int, int] = {}
    for u, v in edges:
        degree[u] = degree.get(u, 0) + 1
        degree[v] = degree.get(v, 0) + 1
    return sum(1 for d in degree.values() if d == 1)


def brute_tree(g: Graph, k: int, l: int) -> tuple[bool, Optional[frozenset[int]]]:
    """Decide whether ``g`` has a k-vertex subtree with exactly l leaves.

    Returns:
        (answer, vertex set of one witness or None)
    """
    if k < 1 or k > g.n:
        return False, None
    if comb(g.n, k) > SUBSET_GUARD:
        raise EnumerationGuardError(f"C({g.n},{k}) exceeds {SUBSET_GUARD}")
    if k == 1:
        return (True, frozenset({0})) if l == 0 else (False, None)
    for vertices in combinations(range(g.n), k):
        for tree in _spanning_trees(g, vertices):
            if _leaf_count(tree) == l:
                return True, frozenset(vertices)
    return False, None


def brute_tree_witnesses(g: Graph, k: int, l: int) -> Iterator[list[tuple[int, int]]]:
    """Every (k, l)-subtree of ``g`` as an edge list."""
    if comb(g.n, k) > SUBSET_GUARD:
        raise EnumerationGuardError(f"C({g.n},{k}) exceeds {SUBSET_GUARD}")
    for vertices in combinations(range(g.n), k):
        for tree in _spanning_trees(g, vertices):
            if _leaf_count(tree) == l:
                yield tree


def labellable_set(g: Graph, tree: Sequence[tuple[int, int]], part: Bipartition) -> frozenset[tuple]:
    """Leaves, internal V1 vertices and V2V2 edges of a subtree given by its edges."""
    vertices = sorted({v for e in tree for v in e})
    if not tree or not _is_tree(tree):
        raise ValueError("edges do not form a tree")
    for u, v in tree:
        if not g.has_edge(u, v):
            raise ValueError(f"{u}-{v} is not an edge of the graph")
    degree = {v: 0 for v in vertices}
    for u, v in tree:
        degree[u] += 1
        degree[v] += 1
    out: set[tuple] = {("leaf", v) for v in vertices if degree[v] == 1}
    out |= {("internal", v) for v in vertices if degree[v] > 1 and part.in_v1(v)}
    out |= {
        ("edge", (min(u, v), max(u, v)))
        for u, v in tree
        if not part.in_v1(u) and not part.in_v1(v)
    }
    return frozenset(out)


def label_count_samples(tree: Sequence[tuple[int, int]], rng: np.random.Generator, samples: int) -> np.ndarray:
    """|la| of a fixed tree under ``samples`` uniform bipartitions."""
    vertices = sorted({v for e in tree for v in e})
    index = {v: i for i, v in enumerate(vertices)}
    degree = np.zeros(len(vertices), dtype=int)
    for u, v in tree:
        degree[index[u]] += 1
        degree[index[v]] += 1
    in_v1 = rng.integers(0, 2, size=(samples, len(vertices))).astype(bool)
    leaves = int((degree == 1).sum())
    internal_v1 = in_v1[:, degree > 1].sum(axis=1)
    ends = np.array([(index[u], index[v]) for u, v in tree], dtype=int).reshape(-1, 2)
    v2v2 = (~in_v1[:, ends[:, 0]] & ~in_v1[:, ends[:, 1]]).sum(axis=1)
    return leaves + internal_v1 + v2v2


def max_internal_spanning(g: Graph) -> int:
    """Largest internal-vertex count over spanning trees; -1 when disconnected."""
    if g.n > SPANNING_MAX_N:
        raise EnumerationGuardError(f"spanning-tree enumeration limited to n<={SPANNING_MAX_N}")
    if g.n == 0:
        return -1
    if g.n == 1:
        return 0
    best = -1
    for tree in _spanning_trees(g, list(range(g.n))):
        best = max(best, g.n - _leaf_count(tree))
        if best == g.n - 2:
            break
    return best


def brute_kist(g: Graph, k: int) -> bool:
    """Spanning tree with at least k internal vertices."""
    best = max_internal_spanning(g)
    return best >= 0 and best >= k


def _check_path_guard(g: Graph) -> None:
    if g.n > PATH_MAX_N:
        raise EnumerationGuardError(f"path enumeration limited to n<={PATH_MAX_N}")


def brute_weighted_path(g: Graph, weights: Sequence[int], k: int, max_len: int) -> bool:
    """Simple path of total weight >= k on at most ``max_len`` vertices."""
    _check_path_guard(g)
    if k <= 0:
        return True

    def extend(v: int, seen: set[int], weight: int) -> bool:
        if weight >= k:
            return True
        if len(seen) == max_len:
            return False
        for u in g.adjacency[v]:
            if u not in seen:
                seen.add(u)
                if extend(u, seen, weight + weights[u]):
                    return True
                seen.remove(u)
        return False

    return max_len >= 1 and any(extend(v, {v}, weights[v]) for v in range(g.n))


def brute_kpath(g: Graph, k: int) -> bool:
    """Simple path on k vertices."""
    return brute_weighted_path(g, [1] * g.n, k, k)


def brute_matching(g: Graph) -> int:
    """Maximum matching size by the blossom algorithm."""
    return len(nx.max_weight_matching(g.to_networkx(), maxcardinality=True))


def random_subtree(g: Graph, k: int, rng: np.random.Generator) -> Optional[list[tuple[int, int]]]:
    """Grow a k-vertex subtree from a random vertex by random frontier edges; None if stuck."""
    if not 2 <= k <= g.n:
        return None
    start = int(rng.integers(g.n))
    inside = {start}
    tree: list[tuple[int, int]] = []
    while len(inside) < k:
        frontier = [(u, v) for u in sorted(inside) for v in g.adjacency[u] if v not in inside]
        if not frontier:
            return None
        u, v = frontier[int(rng.integers(len(frontier)))]
        inside.add(v)
        tree.append((min(u, v), max(u, v)))
    return tree
