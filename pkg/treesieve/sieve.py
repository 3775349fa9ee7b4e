"""Evaluation of the branching-walk polynomial for one bipartition.

A branching walk is a rooted tree mapped homomorphically into the graph. Its
labellable elements are the leaves, the internal nodes mapped into V1 and the
tree edges with both ends in V2. The engine sums, over every non-empty label
set X, a dynamic program over walks whose labellable elements are labelled
from X; inclusion-exclusion in characteristic two leaves only the walks that
correspond to genuine (k, l)-trees.
"""

import logging
from typing import Iterable, Iterator, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from treesieve import field
from treesieve.field import mul
from treesieve.graph import Bipartition, Graph

logger = logging.getLogger(__name__)

NO_PARENT = -1


class SieveInstance(BaseModel):
    """Graph, bipartition and target shape for one polynomial."""
    model_config = ConfigDict(frozen=True)

    graph: Graph
    part: Bipartition
    k: int = Field(ge=3, description="Tree node count")
    l: int = Field(ge=2, description="Leaf count")
    r: int = Field(ge=2, description="Label budget")

    @model_validator(mode="after")
    def _check_shape(self) -> "SieveInstance":
        if self.part.n != self.graph.n:
            raise ValueError(f"bipartition covers {self.part.n} vertices, graph has {self.graph.n}")
        if self.l > self.k - 1:
            raise ValueError(f"l={self.l} exceeds k-1={self.k - 1}")
        if not self.l <= self.r <= 2 * self.k - 1:
            raise ValueError(f"r={self.r} outside [{self.l}, {2 * self.k - 1}]")
        return self


class EvaluationPoint(BaseModel):
    """Values for x (per edge), y (per vertex/edge and label), z (per vertex) and eta."""
    model_config = ConfigDict(frozen=True)

    r: int = Field(ge=1)
    x: tuple[int, ...]
    y_vertex: tuple[tuple[int, ...], ...]
    y_edge: tuple[tuple[int, ...], ...]
    z: tuple[int, ...]
    eta: Optional[int] = None

    @model_validator(mode="after")
    def _check_rows(self) -> "EvaluationPoint":
        if len(self.x) != len(self.y_edge):
            raise ValueError("x and y_edge disagree on the edge count")
        if len(self.z) != len(self.y_vertex):
            raise ValueError("z and y_vertex disagree on the vertex count")
        for row in self.y_vertex + self.y_edge:
            if len(row) != self.r:
                raise ValueError(f"label rows must have length r={self.r}")
        return self

    @classmethod
    def sample(
        cls, g: Graph, r: int, rng: np.random.Generator, eta: Optional[int] = None
    ) -> "EvaluationPoint":
        """Uniform point for every indeterminate of ``g`` with labels 1..r."""
        return cls(
            r=r,
            x=tuple(field.sample_array(rng, g.m).tolist()),
            y_vertex=tuple(map(tuple, field.sample_array(rng, (g.n, r)).tolist())),
            y_edge=tuple(map(tuple, field.sample_array(rng, (g.m, r)).tolist())),
            z=tuple(field.sample_array(rng, g.n).tolist()),
            eta=eta,
        )

    def with_eta(self, eta: Optional[int]) -> "EvaluationPoint":
        return self.model_copy(update={"eta": eta})


class LabelSums:
    """Per-element sums of y over a label set X, updated one label at a time."""

    def __init__(self, point: EvaluationPoint):
        self.point = point
        self.mask = 0
        self.vertex = [0] * len(point.z)
        self.edge = [0] * len(point.x)

    def toggle(self, t: int) -> None:
        """Add label t (1-based) to X, or remove it if present."""
        col = t - 1
        self.mask ^= 1 << col
        for q, row in enumerate(self.point.y_vertex):
            self.vertex[q] ^= row[col]
        for q, row in enumerate(self.point.y_edge):
            self.edge[q] ^= row[col]

    @property
    def labels(self) -> frozenset[int]:
        return frozenset(t + 1 for t in range(self.point.r) if self.mask >> t & 1)


def label_sums(point: EvaluationPoint, labels: Iterable[int]) -> LabelSums:
    """Sums of y over ``labels`` computed from scratch."""
    sums = LabelSums(point)
    for t in sorted(set(labels)):
        if not 1 <= t <= point.r:
            raise ValueError(f"label {t} outside 1..{point.r}")
        sums.toggle(t)
    return sums


def to_gray_code(x: int) -> int:
    return (x >> 1) ^ x


def gray_code_subsets(r: int, start: int = 0, stop: Optional[int] = None) -> Iterator[tuple[int, Optional[int]]]:
    """Yield (mask, flipped label) for Gray-code positions start..stop-1.

    Consecutive masks differ in one bit; the flipped label is 1-based and is
    None for the first position yielded.
    """
    stop = 1 << r if stop is None else stop
    previous = None
    for i in range(start, stop):
        mask = to_gray_code(i)
        flipped = None if previous is None else (mask ^ previous).bit_length()
        yield mask, flipped
        previous = mask


def _node_factors(inst: SieveInstance, point: EvaluationPoint) -> list[int]:
    if point.eta is None:
        return [1] * inst.graph.n
    return [field.power(point.eta, inst.graph.weight(v)) for v in range(inst.graph.n)]


def _run(inst: SieveInstance, point: EvaluationPoint, sums: LabelSums) -> list[int]:
    g = inst.graph
    adj = g.adjacency
    k, max_l, r = inst.k, inst.l, inst.r
    in_v1 = [s == 1 for s in inst.part.side]
    sv, se = sums.vertex, sums.edge
    node = _node_factors(inst, point)

    # per directed edge a -> adj[a][j]: (leaf factor, internal factor, V2V2 flag)
    factors = []
    for a in range(g.n):
        row = []
        for b in adj[a]:
            e = g.edge_id(a, b)
            x = point.x[e]
            if not in_v1[a] and not in_v1[b]:
                f0 = mul(x, se[e])
                f1 = mul(f0, sv[b])
                flag = 1
            else:
                f1 = mul(x, sv[b])
                f0 = f1 if in_v1[b] else x
                flag = 0
            if node[b] != 1:
                f1 = mul(f1, node[b])
            row.append((f1, f0, flag))
        factors.append(row)

    # tables[(p, a)][j][k'] maps (l', i) to a field element
    tables: dict[tuple[int, int], list[list[dict]]] = {}
    for a in range(g.n):
        base = {(0, int(in_v1[a])): node[a]}
        for p in (NO_PARENT,) + adj[a]:
            tables[(p, a)] = [[{}, base] + [{} for _ in range(k - 1)] for _ in range(len(adj[a]) + 1)]

    for kk in range(2, k + 1):
        for (p, a), rows in tables.items():
            nbrs = adj[a]
            acc: dict[tuple[int, int], int] = {}
            for j in range(len(nbrs) - 1, -1, -1):
                b = nbrs[j]
                if b != p:
                    f1, f0, flag = factors[a][j]
                    nxt = rows[j + 1]
                    if f1:
                        for (l1, i1), val in nxt[kk - 1].items():
                            key = (l1 + 1, i1 + 1 + flag)
                            if key[0] <= max_l and key[1] <= r:
                                acc[key] = acc.get(key, 0) ^ mul(f1, val)
                    if f0 and kk >= 3:
                        child = tables[(a, b)][0]
                        conv: dict[tuple[int, int], int] = {}
                        for k1 in range(1, kk - 1):
                            left, right = nxt[k1], child[kk - k1]
                            if not left or not right:
                                continue
                            for (l1, i1), v1 in left.items():
                                for (l2, i2), v2 in right.items():
                                    lt, it = l1 + l2, i1 + i2 + flag
                                    if lt <= max_l and it <= r:
                                        conv[(lt, it)] = conv.get((lt, it), 0) ^ mul(v1, v2)
                        for key, val in conv.items():
                            if val:
                                acc[key] = acc.get(key, 0) ^ mul(f0, val)
                rows[j][kk] = {key: val for key, val in acc.items() if val}

    out = [0] * (r + 1)
    for v in range(g.n):
        total = dict(tables[(NO_PARENT, v)][0][k])
        # roots with exactly one child are leaves of the unrooted tree
        own = int(in_v1[v])
        for j, b in enumerate(adj[v]):
            f1, f0, flag = factors[v][j]
            if not f0:
                continue
            scale = mul(f0, node[v])
            for (l2, i2), val in tables[(v, b)][0][k - 1].items():
                key = (l2, own + i2 + flag)
                if l2 <= max_l and key[1] <= r:
                    total[key] = total.get(key, 0) ^ mul(scale, val)
        root = point.z[v] if not in_v1[v] else mul(point.z[v], sv[v])
        if not root:
            continue
        for i in range(r + 1):
            val = total.get((max_l, i))
            if val:
                out[i] ^= mul(root, val)
    return out


def dp_evaluate(
    inst: SieveInstance, point: EvaluationPoint, labels: Union[LabelSums, Iterable[int]]
) -> list[int]:
    """Sum over walks and all labelings into X, indexed by labellable count i in 0..r."""
    if point.r != inst.r:
        raise ValueError(f"point has r={point.r}, instance has r={inst.r}")
    sums = labels if isinstance(labels, LabelSums) else label_sums(point, labels)
    return _run(inst, point, sums)


def evaluate_P(
    inst: SieveInstance, point: EvaluationPoint, start: int = 0, stop: Optional[int] = None
) -> int:
    """Value of the sieve polynomial at ``point``.

    Label sets X are visited in Gray-code order. For each X the engine adds the
    DP outputs at i = max(2, max X)..r, so that every i collects exactly the
    subsets of {1..i}. ``start``/``stop`` restrict the walk to a contiguous
    segment of Gray-code positions; segment results combine by XOR.
    """
    if point.r != inst.r:
        raise ValueError(f"point has r={point.r}, instance has r={inst.r}")
    r = inst.r
    total = 0
    sums: Optional[LabelSums] = None
    for mask, flipped in gray_code_subsets(r, start, stop):
        if sums is None:
            sums = label_sums(point, (t + 1 for t in range(r) if mask >> t & 1))
        else:
            sums.toggle(flipped)
        if not mask:
            continue
        values = _run(inst, point, sums)
        for i in range(max(2, mask.bit_length()), r + 1):
            total ^= values[i]
    return total


def evaluate_weighted(inst: SieveInstance, base_point: EvaluationPoint, weight_cap: int) -> list[int]:
    """Coefficients R_0..R_D of the sieve polynomial as a polynomial in eta.

    Evaluates at D + 1 distinct eta values, D = k * max weight, and solves the
    Vandermonde system. Callers test the coefficients at indices >= weight_cap.
    """
    g = inst.graph
    if g.weights is None:
        raise ValueError("weighted evaluation needs vertex weights")
    if weight_cap < inst.k:
        raise ValueError(f"weight_cap={weight_cap} below k={inst.k}")
    degree = inst.k * max(g.weights, default=1)
    etas = list(range(1, degree + 2))
    values = [evaluate_P(inst, base_point.with_eta(eta)) for eta in etas]
    vandermonde = [[field.power(eta, d) for d in range(degree + 1)] for eta in etas]
    logger.debug("interpolating %d eta samples", len(etas))
    return field.solve(vandermonde, values)


def has_weight_at_least(coefficients: list[int], weight_cap: int) -> bool:
    return any(coefficients[weight_cap:])
