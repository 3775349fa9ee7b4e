"""Reading and writing the text formats for graphs, colorings and partitions.

All formats use 1-based vertex ids; objects returned are 0-based.
"""

from pathlib import Path
from typing import Iterator, Optional, Union

from pydantic import ValidationError

from treesieve.coloring import FractionalColoring, ProperColoring, VectorColoring
from treesieve.errors import GraphFormatError
from treesieve.graph import Bipartition, Graph

PathLike = Union[str, Path]


def _lines(text: str) -> Iterator[tuple[int, list[str]]]:
    """Yield (line number, tokens) for non-blank, non-comment lines."""
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line.split()


def _ints(tokens: list[str], line: int) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise GraphFormatError(f"expected integers, got {' '.join(tokens)!r}", line) from None


def _check_id(v: int, n: Optional[int], line: int) -> None:
    if v < 1 or (n is not None and v > n):
        bound = "" if n is None else f" (n={n})"
        raise GraphFormatError(f"vertex id {v} out of range{bound}", line)


def parse_graph(text: Union[str, bytes]) -> Graph:
    """Parse an edge list or DIMACS graph.

    Edge lists contain "u v" lines, optional "w u c" weight lines and an
    optional leading single-integer vertex count. DIMACS input is recognised
    by its "p edge n m" header; "c" lines are comments. m must count the
    "e" lines or the distinct edges they name.

    Raises:
        GraphFormatError: malformed line, out-of-range id or loop, with line number
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    rows = list(_lines(text))
    dimacs = any(tokens[0] == "p" for _, tokens in rows)
    n: Optional[int] = None
    edges: list[tuple[int, int, int]] = []
    weights: dict[int, tuple[int, int]] = {}
    for index, (line, tokens) in enumerate(rows):
        head = tokens[0]
        if dimacs:
            if head == "c":
                continue
            if head == "p":
                if len(tokens) != 4 or tokens[1] not in ("edge", "col"):
                    raise GraphFormatError("expected 'p edge n m'", line)
                n, declared_m = _ints(tokens[2:4], line)
                header_line = line
                continue
            if head == "e":
                if n is None:
                    raise GraphFormatError("edge before 'p' header", line)
                if len(tokens) != 3:
                    raise GraphFormatError("expected 'e u v'", line)
                u, v = _ints(tokens[1:], line)
                edges.append((u, v, line))
                continue
            raise GraphFormatError(f"unknown DIMACS line type {head!r}", line)
        if head == "w":
            if len(tokens) != 3:
                raise GraphFormatError("expected 'w u c'", line)
            u, c = _ints(tokens[1:], line)
            if c < 1:
                raise GraphFormatError(f"weight {c} must be positive", line)
            weights[u] = (c, line)
        elif len(tokens) == 1 and index == 0:
            n = _ints(tokens, line)[0]
            if n < 0:
                raise GraphFormatError("negative vertex count", line)
        elif len(tokens) == 2:
            u, v = _ints(tokens, line)
            edges.append((u, v, line))
        else:
            raise GraphFormatError(f"expected 'u v', got {' '.join(tokens)!r}", line)

    if dimacs and n is not None:
        distinct = len({frozenset((u, v)) for u, v, _ in edges})
        if declared_m not in (len(edges), distinct):
            raise GraphFormatError(f"header declares {declared_m} edges, found {distinct}", header_line)
    if n is None:
        ids = [max(u, v) for u, v, _ in edges] + list(weights)
        n = max(ids, default=0)
    pairs = []
    for u, v, line in edges:
        _check_id(u, n, line)
        _check_id(v, n, line)
        if u == v:
            raise GraphFormatError(f"loop at vertex {u}", line)
        pairs.append((u - 1, v - 1))
    weight_list = None
    if weights:
        weight_list = [1] * n
        for u, (c, line) in weights.items():
            _check_id(u, n, line)
            weight_list[u - 1] = c
    return Graph.from_edges(n, pairs, weight_list)


def serialize_graph(g: Graph) -> str:
    """Edge list text that parses back to ``g``."""
    out = [str(g.n)]
    out.extend(f"{u + 1} {v + 1}" for u, v in g.edges)
    if g.weights is not None:
        out.extend(f"w {v + 1} {w}" for v, w in enumerate(g.weights))
    return "\n".join(out) + "\n"


def _read(path: PathLike) -> str:
    return Path(path).read_text(encoding="utf-8")


def read_graph(path: PathLike) -> Graph:
    return parse_graph(_read(path))


def write_graph(g: Graph, path: PathLike) -> None:
    Path(path).write_text(serialize_graph(g), encoding="utf-8")


def _wrap(build, what: str):
    try:
        return build()
    except ValidationError as exc:
        raise GraphFormatError(f"invalid {what}: {exc.errors()[0]['msg']}") from None


def parse_coloring(text: str) -> ProperColoring:
    """Line i holds the color of vertex i."""
    colors = []
    for line, tokens in _lines(text):
        if len(tokens) != 1:
            raise GraphFormatError("expected one color per line", line)
        colors.append(_ints(tokens, line)[0])
    d = max(colors, default=1)
    return _wrap(lambda: ProperColoring(color=tuple(colors), d=d), "coloring")


def parse_fractional(text: str) -> FractionalColoring:
    """Header "a b", then b colors per vertex line."""
    rows = list(_lines(text))
    if not rows:
        raise GraphFormatError("empty fractional coloring")
    line, header = rows[0]
    if len(header) != 2:
        raise GraphFormatError("expected header 'a b'", line)
    a, b = _ints(header, line)
    sets = []
    for line, tokens in rows[1:]:
        colors = _ints(tokens, line)
        if len(set(colors)) != len(colors):
            raise GraphFormatError("repeated color", line)
        sets.append(frozenset(colors))
    return _wrap(lambda: FractionalColoring(a=a, b=b, colorset=tuple(sets)), "fractional coloring")


def parse_vectors(text: str) -> VectorColoring:
    """Header "n dim value", then dim coordinates per vertex line."""
    rows = list(_lines(text))
    if not rows:
        raise GraphFormatError("empty vector file")
    line, header = rows[0]
    if len(header) != 3:
        raise GraphFormatError("expected header 'n dim value'", line)
    n, dim = _ints(header[:2], line)
    try:
        value = float(header[2])
    except ValueError:
        raise GraphFormatError(f"bad value {header[2]!r}", line) from None
    vectors = []
    for line, tokens in rows[1:]:
        if len(tokens) != dim:
            raise GraphFormatError(f"expected {dim} coordinates, got {len(tokens)}", line)
        try:
            vectors.append(tuple(float(t) for t in tokens))
        except ValueError:
            raise GraphFormatError("bad coordinate", line) from None
    if len(vectors) != n:
        raise GraphFormatError(f"header announces {n} vectors, found {len(vectors)}")
    return _wrap(lambda: VectorColoring(vectors=tuple(vectors), value=value), "vector coloring")


def parse_partition(text: str) -> Bipartition:
    """Line i holds the side (1 or 2) of vertex i."""
    sides = []
    for line, tokens in _lines(text):
        if len(tokens) != 1:
            raise GraphFormatError("expected one side per line", line)
        side = _ints(tokens, line)[0]
        if side not in (1, 2):
            raise GraphFormatError(f"side must be 1 or 2, got {side}", line)
        sides.append(side)
    return Bipartition(side=tuple(sides))


def read_coloring(path: PathLike) -> ProperColoring:
    return parse_coloring(_read(path))


def read_fractional(path: PathLike) -> FractionalColoring:
    return parse_fractional(_read(path))


def read_vectors(path: PathLike) -> VectorColoring:
    return parse_vectors(_read(path))


def read_partition(path: PathLike) -> Bipartition:
    return parse_partition(_read(path))
