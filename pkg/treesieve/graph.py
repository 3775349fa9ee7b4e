"""Graph and bipartition models.

Vertices are 0-based here; the file formats in ``treesieve.formats`` are the
only place where 1-based ids appear.
"""

from typing import Iterable, Optional

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator


class Graph(BaseModel):
    """Undirected simple graph with sorted adjacency and optional vertex weights."""
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=0, description="Vertex count")
    adjacency: tuple[tuple[int, ...], ...] = Field(description="Strictly increasing neighbor lists")
    weights: Optional[tuple[int, ...]] = Field(default=None, description="Positive vertex weights")

    _edge_ids: dict[tuple[int, int], int] = PrivateAttr(default_factory=dict)
    _edges: tuple[tuple[int, int], ...] = PrivateAttr(default=())

    @model_validator(mode="after")
    def _check_simple(self) -> "Graph":
        if len(self.adjacency) != self.n:
            raise ValueError(f"adjacency has {len(self.adjacency)} rows for n={self.n}")
        for v, nbrs in enumerate(self.adjacency):
            if any(b <= a for a, b in zip(nbrs, nbrs[1:])):
                raise ValueError(f"neighbors of {v} are not strictly increasing")
            for u in nbrs:
                if u == v:
                    raise ValueError(f"loop at vertex {v}")
                if not 0 <= u < self.n:
                    raise ValueError(f"neighbor {u} of {v} out of range")
        for v, nbrs in enumerate(self.adjacency):
            for u in nbrs:
                if v not in self.adjacency[u]:
                    raise ValueError(f"edge {v}-{u} is not symmetric")
        if self.weights is not None:
            if len(self.weights) != self.n:
                raise ValueError("one weight per vertex required")
            if any(w < 1 for w in self.weights):
                raise ValueError("weights must be positive")
        return self

    def model_post_init(self, __context) -> None:
        edges = tuple((u, v) for u in range(self.n) for v in self.adjacency[u] if u < v)
        self._edges = edges
        self._edge_ids = {e: i for i, e in enumerate(edges)}

    @classmethod
    def from_edges(
        cls, n: int, edges: Iterable[tuple[int, int]], weights: Optional[Iterable[int]] = None
    ) -> "Graph":
        """Build a graph from 0-based edges; duplicates collapse, loops are rejected."""
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge {u}-{v} out of range for n={n}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(
            n=n,
            adjacency=tuple(tuple(sorted(s)) for s in nbrs),
            weights=None if weights is None else tuple(weights),
        )

    @classmethod
    def from_networkx(cls, g: nx.Graph) -> "Graph":
        nodes = sorted(g.nodes)
        index = {v: i for i, v in enumerate(nodes)}
        return cls.from_edges(len(nodes), ((index[u], index[v]) for u, v in g.edges))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self._edges)
        return g

    @property
    def m(self) -> int:
        return len(self._edges)

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """Edges (u, v) with u < v, ordered; position is the edge id."""
        return self._edges

    def edge_id(self, u: int, v: int) -> int:
        return self._edge_ids[(u, v) if u < v else (v, u)]

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self._edge_ids

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def weight(self, v: int) -> int:
        return 1 if self.weights is None else self.weights[v]

    @property
    def total_weight(self) -> int:
        return self.n if self.weights is None else sum(self.weights)

    def is_connected(self) -> bool:
        """True for graphs with at least one vertex and a single component."""
        return self.n > 0 and nx.is_connected(self.to_networkx())

    def with_weights(self, weights: Optional[Iterable[int]]) -> "Graph":
        return Graph(n=self.n, adjacency=self.adjacency, weights=None if weights is None else tuple(weights))

    def relabel(self, perm: list[int]) -> "Graph":
        """Copy with vertex v renamed to perm[v]."""
        weights = None
        if self.weights is not None:
            weights = [0] * self.n
            for v, w in enumerate(self.weights):
                weights[perm[v]] = w
        return Graph.from_edges(self.n, ((perm[u], perm[v]) for u, v in self._edges), weights)


def induced_subgraph(g: Graph, s: Iterable[int]) -> tuple[Graph, tuple[int, ...]]:
    """Subgraph induced by ``s`` with contiguous ids.

    Args:
        g: Host graph
        s: Vertex subset of ``g``

    Returns:
        (subgraph, mapping) where mapping[i] is the host vertex of subgraph vertex i
    """
    keep = sorted(set(s))
    for v in keep:
        if not 0 <= v < g.n:
            raise ValueError(f"vertex {v} out of range for n={g.n}")
    index = {v: i for i, v in enumerate(keep)}
    edges = [(index[u], index[v]) for u in keep for v in g.adjacency[u] if u < v and v in index]
    weights = None if g.weights is None else [g.weights[v] for v in keep]
    return Graph.from_edges(len(keep), edges, weights), tuple(keep)


class Bipartition(BaseModel):
    """Two-way vertex partition; side[v] is 1 or 2."""
    model_config = ConfigDict(frozen=True)

    side: tuple[int, ...] = Field(description="Side of each vertex")

    @model_validator(mode="after")
    def _check_sides(self) -> "Bipartition":
        bad = [v for v, s in enumerate(self.side) if s not in (1, 2)]
        if bad:
            raise ValueError(f"vertex {bad[0]} has side {self.side[bad[0]]}, expected 1 or 2")
        return self

    @classmethod
    def from_v1(cls, n: int, v1: Iterable[int]) -> "Bipartition":
        chosen = set(v1)
        return cls(side=tuple(1 if v in chosen else 2 for v in range(n)))

    @classmethod
    def uniform(cls, n: int, side: int) -> "Bipartition":
        return cls(side=(side,) * n)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Bipartition":
        """Each vertex joins V1 independently with probability 1/2."""
        return cls(side=tuple(int(s) for s in rng.integers(1, 3, size=n)))

    @property
    def n(self) -> int:
        return len(self.side)

    @property
    def v1(self) -> frozenset[int]:
        return frozenset(v for v, s in enumerate(self.side) if s == 1)

    def in_v1(self, v: int) -> bool:
        return self.side[v] == 1
