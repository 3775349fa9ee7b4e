"""Arithmetic in GF(2^64) modulo x^64 + x^4 + x^3 + x + 1.

Elements are Python ints in [0, 2^64). The scalar path works on ints; the
vectorised path works on numpy uint64 arrays and must agree bit for bit.
"""

from typing import Sequence

import numpy as np

BITS = 64
ORDER = 1 << BITS
MASK = ORDER - 1
MODULUS = ORDER | 0b11011

ZERO = 0
ONE = 1

_U64 = np.uint64
_U64_ONE = np.uint64(1)
_U64_ZERO = np.uint64(0)
_SHIFTS = [np.uint64(s) for s in range(BITS + 1)]


def add(a: int, b: int) -> int:
    return a ^ b


def _clmul(a: int, b: int) -> int:
    # 4-bit window over b
    table = [0] * 16
    for j in range(1, 16):
        table[j] = (table[j >> 1] << 1) ^ (a if j & 1 else 0)
    result = 0
    shift = 0
    while b:
        result ^= table[b & 15] << shift
        b >>= 4
        shift += 4
    return result


def _reduce(x: int) -> int:
    while x >> BITS:
        hi = x >> BITS
        x = (x & MASK) ^ hi ^ (hi << 1) ^ (hi << 3) ^ (hi << 4)
    return x


def mul(a: int, b: int) -> int:
    if not a or not b:
        return 0
    return _reduce(_clmul(a, b))


def square(a: int) -> int:
    return mul(a, a)


def power(a: int, e: int) -> int:
    """Square-and-multiply exponentiation; power(0, 0) is 1."""
    if e < 0:
        return power(inv(a), -e)
    result = ONE
    while e:
        if e & 1:
            result = mul(result, a)
        a = mul(a, a)
        e >>= 1
    return result


def inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("zero has no inverse in GF(2^64)")
    return power(a, ORDER - 2)


def sample(rng: np.random.Generator) -> int:
    """Uniform field element drawn from ``rng``."""
    return int(rng.integers(0, np.iinfo(np.uint64).max, dtype=np.uint64, endpoint=True))


def sample_array(rng: np.random.Generator, size) -> np.ndarray:
    """Array of uniform field elements with the given shape."""
    return rng.integers(0, np.iinfo(np.uint64).max, size=size, dtype=np.uint64, endpoint=True)


def _reduce_batch(hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
    # x^64 = x^4 + x^3 + x + 1; hi << k overflows by at most 4 bits
    spill = (hi >> _SHIFTS[63]) ^ (hi >> _SHIFTS[61]) ^ (hi >> _SHIFTS[60])
    lo = lo ^ hi ^ (hi << _SHIFTS[1]) ^ (hi << _SHIFTS[3]) ^ (hi << _SHIFTS[4])
    return lo ^ spill ^ (spill << _SHIFTS[1]) ^ (spill << _SHIFTS[3]) ^ (spill << _SHIFTS[4])


def mul_batch(a, b) -> np.ndarray:
    """Elementwise product of two broadcastable uint64 arrays."""
    a = np.asarray(a, dtype=_U64)
    b = np.asarray(b, dtype=_U64)
    a, b = np.broadcast_arrays(a, b)
    lo = np.zeros(a.shape, dtype=_U64)
    hi = np.zeros(a.shape, dtype=_U64)
    for i in range(BITS):
        bit = (b >> _SHIFTS[i]) & _U64_ONE
        mask = _U64_ZERO - bit
        lo ^= (a << _SHIFTS[i]) & mask
        if i:
            hi ^= (a >> _SHIFTS[BITS - i]) & mask
    return _reduce_batch(hi, lo)


def _as_matrix(rows: Sequence[Sequence[int]]) -> np.ndarray:
    return np.array([[int(v) for v in row] for row in rows], dtype=_U64).reshape(len(rows), -1)


def _eliminate(m: np.ndarray) -> list[int]:
    """Reduce ``m`` in place to row echelon form; returns pivot columns."""
    n_rows, n_cols = m.shape
    pivots = []
    row = 0
    for col in range(n_cols):
        if row == n_rows:
            break
        nz = np.flatnonzero(m[row:, col])
        if nz.size == 0:
            continue
        pr = row + int(nz[0])
        if pr != row:
            m[[row, pr]] = m[[pr, row]]
        m[row] = mul_batch(m[row], np.uint64(inv(int(m[row, col]))))
        below = np.flatnonzero(m[:, col])
        below = below[below != row]
        if below.size:
            factors = m[below, col][:, None]
            m[below] ^= mul_batch(factors, m[row][None, :])
        pivots.append(col)
        row += 1
    return pivots


def rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank of a matrix over GF(2^64)."""
    if not len(rows):
        return 0
    m = _as_matrix(rows)
    if m.size == 0:
        return 0
    return len(_eliminate(m))


def solve(rows: Sequence[Sequence[int]], rhs: Sequence[int]) -> list[int]:
    """Solve a square nonsingular system ``rows @ x = rhs`` over GF(2^64).

    Raises:
        ValueError: if the matrix is singular.
    """
    n = len(rows)
    m = np.concatenate([_as_matrix(rows), _as_matrix([[v] for v in rhs])], axis=1)
    pivots = _eliminate(m)
    if pivots != list(range(n)):
        raise ValueError("singular system")
    return [int(v) for v in m[:, n]]
