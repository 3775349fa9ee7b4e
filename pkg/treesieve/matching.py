"""Maximum matching size from the rank of a random Tutte matrix."""

import numpy as np

from treesieve import field
from treesieve.graph import Graph


def tutte_matrix(g: Graph, rng: np.random.Generator) -> list[list[int]]:
    """Symmetric matrix with a shared random value at (u, v) and (v, u) per edge.

    In characteristic two the skew-symmetric Tutte matrix is symmetric with a
    zero diagonal.
    """
    mat = [[0] * g.n for _ in range(g.n)]
    values = field.sample_array(rng, g.m).tolist()
    for (u, v), x in zip(g.edges, values):
        mat[u][v] = x
        mat[v][u] = x
    return mat


def matching_size(g: Graph, rng: np.random.Generator) -> int:
    """Maximum matching size; never overestimates, exact with probability >= 1 - n/2^64."""
    if g.m == 0:
        return 0
    return field.rank(tutte_matrix(g, rng)) // 2
