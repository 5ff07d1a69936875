"""Coefficient-vector spaces: nonzero vectors, canonical representatives,
parallel classes and the (N-1)-tuple space walked by the general scheme.

Vectors are tuples of element indices. All orders are lexicographic with the
first entry most significant, so round indices are reproducible anywhere.
"""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from mcp_pfr.config import DEFAULT_SETTINGS
from mcp_pfr.errors import ValidationError
from mcp_pfr.field import FieldSpec, field_inv, vec_scale

CoeffVector = tuple[int, ...]
CoeffTuple = tuple[CoeffVector, ...]


def _check_cap(count: int, cap: int | None) -> None:
    cap = DEFAULT_SETTINGS.enum_cap if cap is None else cap
    if count > cap:
        raise ValidationError(f"enumeration of {count} items exceeds the cap {cap}")


def _check_qk(q: int, K: int) -> None:
    if q < 2 or K < 1:
        raise ValidationError(f"need q >= 2 and K >= 1, got q={q}, K={K}")


def nonzero_count(q: int, K: int) -> int:
    return q**K - 1


def canonical_count(q: int, K: int) -> int:
    return (q**K - 1) // (q - 1)


def nonzero_array(q: int, K: int, cap: int | None = None) -> np.ndarray:
    """All nonzero vectors as a (q^K - 1, K) int array, row i = integer i+1 in base q."""
    _check_qk(q, K)
    _check_cap(q**K - 1, cap)
    idx = np.arange(1, q**K, dtype=np.int64)
    powers = q ** np.arange(K - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % q


def vector_index(v: Sequence[int], q: int) -> int:
    """Position of a nonzero vector in ``enum_nonzero`` order."""
    key = 0
    for a in v:
        key = key * q + a
    if key == 0:
        raise ValidationError("the zero vector has no index")
    return key - 1


def enum_nonzero(q: int, K: int, cap: int | None = None) -> list[CoeffVector]:
    _check_qk(q, K)
    _check_cap(q**K - 1, cap)
    return [v for v in itertools.product(range(q), repeat=K) if any(v)]


def _leading(v: Sequence[int]) -> int:
    for a in v:
        if a:
            return a
    return 0


def enum_canonical(q: int, K: int, cap: int | None = None) -> list[CoeffVector]:
    """Class representatives whose first nonzero entry is 1; entry θ-1 is v(θ)."""
    return [v for v in enum_nonzero(q, K, cap) if _leading(v) == 1]


def canonical_form(v: Sequence[int], f: FieldSpec) -> tuple[int, CoeffVector]:
    """Return (β, u) with v = β·u and u canonical."""
    beta = _leading(v)
    if beta == 0:
        raise ValidationError("the zero vector has no parallel class")
    return beta, vec_scale(field_inv(beta, f), v, f)


def theta_vector(theta: int, q: int, K: int, cap: int | None = None) -> CoeffVector:
    canon = enum_canonical(q, K, cap)
    if not 1 <= theta <= len(canon):
        raise ValidationError(f"theta={theta} outside [1, {len(canon)}]")
    return canon[theta - 1]


def theta_index(v: Sequence[int], f: FieldSpec) -> int:
    """Inverse of ``theta_vector`` (up to the parallel class of v)."""
    _, u = canonical_form(v, f)
    return enum_canonical(f.q, len(v)).index(u) + 1


def parallel_class(v: Sequence[int], f: FieldSpec) -> set[CoeffVector]:
    f.check_vector(v)
    if not any(v):
        raise ValidationError("the zero vector has no parallel class")
    return {vec_scale(beta, v, f) for beta in range(1, f.q)}


def parallel_mask(theta: int, f: FieldSpec, K: int) -> np.ndarray:
    """Boolean mask over ``nonzero_array`` rows: True where the row is parallel to v(θ)."""
    mask = np.zeros(f.q**K - 1, dtype=bool)
    for u in parallel_class(theta_vector(theta, f.q, K), f):
        mask[vector_index(u, f.q)] = True
    return mask


# ---------------------------------------------------------------------------
# (N-1)-tuples
# ---------------------------------------------------------------------------

def tuple_count(q: int, K: int, N: int) -> int:
    return (q**K - 1) ** (N - 1)


def tuple_at(q: int, K: int, N: int, m: int) -> CoeffTuple:
    """Round m's tuple: mixed radix over ``enum_nonzero``, first component most significant."""
    _check_qk(q, K)
    if N < 2:
        raise ValidationError(f"N={N} must be >= 2")
    total = tuple_count(q, K, N)
    if not 0 <= m < total:
        raise ValidationError(f"round index {m} outside [0, {total})")
    base = q**K - 1
    digits = []
    for _ in range(N - 1):
        m, d = divmod(m, base)
        digits.append(d)
    vectors = []
    for d in reversed(digits):
        key = d + 1
        vectors.append(tuple((key // q**e) % q for e in range(K - 1, -1, -1)))
    return tuple(vectors)


def tuple_indices(q: int, K: int, N: int, cap: int | None = None) -> np.ndarray:
    """(count, N-1) array of ``nonzero_array`` row indices in ``tuple_at`` order."""
    _check_qk(q, K)
    count = tuple_count(q, K, N)
    _check_cap(count, cap)
    if N == 1:
        return np.zeros((1, 0), dtype=np.int64)
    grid = np.unravel_index(np.arange(count, dtype=np.int64), (q**K - 1,) * (N - 1))
    return np.stack(grid, axis=1).astype(np.int64)


def is_parallel_tuple(t: Sequence[CoeffVector], theta: int, f: FieldSpec) -> bool:
    if not t:
        return True
    cls = parallel_class(theta_vector(theta, f.q, len(t[0])), f)
    return all(tuple(v) in cls for v in t)
