"""Colorings and the bipartition samplers built on them."""

import logging

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from treesieve.errors import InvalidColoringError
from treesieve.graph import Bipartition, Graph

logger = logging.getLogger(__name__)

VECTOR_TOLERANCE = 1e-9


class ProperColoring(BaseModel):
    """Vertex colors 1..d."""
    model_config = ConfigDict(frozen=True)

    color: tuple[int, ...] = Field(description="Color of each vertex, 1-based")
    d: int = Field(ge=1, description="Number of colors")

    @model_validator(mode="after")
    def _check_range(self) -> "ProperColoring":
        for v, c in enumerate(self.color):
            if not 1 <= c <= self.d:
                raise ValueError(f"vertex {v} has color {c} outside 1..{self.d}")
        return self

    def validate_for(self, g: Graph) -> None:
        """Raise InvalidColoringError unless this coloring is proper on ``g``."""
        if len(self.color) != g.n:
            raise InvalidColoringError(f"coloring covers {len(self.color)} vertices, graph has {g.n}")
        for u, v in g.edges:
            if self.color[u] == self.color[v]:
                raise InvalidColoringError(f"edge {u + 1}-{v + 1} is monochromatic (color {self.color[u]})")

    def classes(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.d)]
        for v, c in enumerate(self.color):
            out[c - 1].append(v)
        return out


class FractionalColoring(BaseModel):
    """(a:b)-coloring: every vertex gets b of the colors 1..a."""
    model_config = ConfigDict(frozen=True)

    a: int = Field(ge=1)
    b: int = Field(ge=1)
    colorset: tuple[frozenset[int], ...]

    @model_validator(mode="after")
    def _check_sets(self) -> "FractionalColoring":
        if self.b > self.a:
            raise ValueError(f"b={self.b} exceeds a={self.a}")
        for v, s in enumerate(self.colorset):
            if len(s) != self.b:
                raise ValueError(f"vertex {v} has {len(s)} colors, expected {self.b}")
            if any(not 1 <= c <= self.a for c in s):
                raise ValueError(f"vertex {v} uses a color outside 1..{self.a}")
        return self

    def validate_for(self, g: Graph) -> None:
        if len(self.colorset) != g.n:
            raise InvalidColoringError(f"coloring covers {len(self.colorset)} vertices, graph has {g.n}")
        for u, v in g.edges:
            if self.colorset[u] & self.colorset[v]:
                raise InvalidColoringError(f"edge {u + 1}-{v + 1} shares colors")


class VectorColoring(BaseModel):
    """Unit vectors with dot product at most -1/(value-1) across every edge."""
    model_config = ConfigDict(frozen=True)

    vectors: tuple[tuple[float, ...], ...]
    value: float = Field(gt=1.0)

    @model_validator(mode="after")
    def _check_norms(self) -> "VectorColoring":
        dims = {len(vec) for vec in self.vectors}
        if len(dims) > 1:
            raise ValueError("vectors have mixed dimensions")
        if self.vectors:
            norms = np.linalg.norm(self.matrix, axis=1)
            bad = np.flatnonzero(np.abs(norms - 1.0) > VECTOR_TOLERANCE)
            if bad.size:
                raise ValueError(f"vector {int(bad[0])} has norm {norms[bad[0]]:.12f}")
        return self

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.vectors, dtype=float)

    @property
    def dim(self) -> int:
        return len(self.vectors[0]) if self.vectors else 0

    def validate_for(self, g: Graph) -> None:
        if len(self.vectors) != g.n:
            raise InvalidColoringError(f"{len(self.vectors)} vectors for {g.n} vertices")
        bound = -1.0 / (self.value - 1.0) + VECTOR_TOLERANCE
        mat = self.matrix
        for u, v in g.edges:
            dot = float(mat[u] @ mat[v])
            if dot > bound:
                raise InvalidColoringError(
                    f"edge {u + 1}-{v + 1} has dot product {dot:.6f} > {bound:.6f}"
                )


def greedy_coloring(g: Graph) -> ProperColoring:
    """DSATUR coloring: repeatedly color the vertex with the most distinct neighbor colors."""
    if g.n == 0:
        return ProperColoring(color=(), d=1)
    assigned = nx.coloring.greedy_color(g.to_networkx(), strategy="saturation_largest_first")
    color = tuple(assigned[v] + 1 for v in range(g.n))
    return ProperColoring(color=color, d=max(color))


def sample_independent_set(g: Graph, rng: np.random.Generator) -> frozenset[int]:
    """Maximal independent set from a uniformly random vertex order."""
    chosen: set[int] = set()
    for v in rng.permutation(g.n).tolist():
        if not any(u in chosen for u in g.adjacency[v]):
            chosen.add(v)
    return frozenset(chosen)


def hyperplane_bipartition(vc: VectorColoring, rng: np.random.Generator) -> Bipartition:
    """Side 1 for vectors on the nonnegative side of a random hyperplane."""
    if not vc.vectors:
        return Bipartition(side=())
    h = rng.standard_normal(vc.dim)
    h /= np.linalg.norm(h)
    dots = vc.matrix @ h
    return Bipartition(side=tuple(1 if d >= 0 else 2 for d in dots.tolist()))
