"""GF(q) arithmetic for q = p^m, the coefficient field of every scheme.

Elements are canonical integer indices: the coefficients of the element's
polynomial in the reduction basis, packed base p (the ``galois`` integer
representation). Scalar products go through the exp/log tables; anything
vectorised goes through the ``galois`` FieldArray class held by each FieldSpec.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import galois
import numpy as np

from mcp_pfr.errors import FieldError, InternalError, ValidationError

log = logging.getLogger(__name__)

MAX_ORDER = 2**16

FieldElement = int


@dataclass(frozen=True)
class FieldSpec:
    p: int
    m: int
    q: int
    reduction_poly: tuple[int, ...]
    exp_table: np.ndarray = dc_field(compare=False, repr=False)
    log_table: np.ndarray = dc_field(compare=False, repr=False)
    GF: type = dc_field(compare=False, repr=False)

    # ── element helpers ───────────────────────────────────────────────

    def check(self, a: int) -> int:
        """Return ``a`` if it is a valid element index, else raise FieldError."""
        if not isinstance(a, (int, np.integer)) or not 0 <= a < self.q:
            raise FieldError(f"element {a!r} is not in GF({self.q})")
        return int(a)

    def check_vector(self, v: Sequence[int]) -> tuple[int, ...]:
        return tuple(self.check(a) for a in v)

    def array(self, values) -> galois.FieldArray:
        """Wrap ints (any shape) as a FieldArray of this field."""
        arr = np.asarray(values, dtype=np.int64)
        if arr.size and (arr.min() < 0 or arr.max() >= self.q):
            raise FieldError(f"array holds values outside GF({self.q})")
        return self.GF(arr)

    def log(self, a: int) -> int:
        if self.check(a) == 0:
            raise FieldError("log(0) is undefined")
        return int(self.log_table[a])

    @property
    def elements(self) -> range:
        """Canonical enumeration 0 < 1 < ... < q-1."""
        return range(self.q)

    def __str__(self) -> str:
        return f"GF({self.p}^{self.m})" if self.m > 1 else f"GF({self.p})"


def to_ints(arr) -> np.ndarray:
    """Plain int64 view of a FieldArray (or anything array-like)."""
    if isinstance(arr, galois.FieldArray):
        arr = arr.view(np.ndarray)
    return np.asarray(arr, dtype=np.int64)


@functools.lru_cache(maxsize=None)
def field_make(p: int, m: int = 1) -> FieldSpec:
    """Build GF(p^m) over the lexicographically smallest monic irreducible polynomial."""
    if not isinstance(p, int) or p < 2 or not galois.is_prime(p):
        raise ValidationError(f"p={p} is not prime")
    if not isinstance(m, int) or m < 1:
        raise ValidationError(f"extension degree m={m} must be >= 1")
    q = p**m
    if q > MAX_ORDER:
        raise ValidationError(f"q={p}^{m}={q} exceeds the field size cap {MAX_ORDER}")

    poly = galois.irreducible_poly(p, m, method="min")
    if poly is None or poly.degree != m or not poly.is_irreducible():
        raise InternalError(f"no irreducible polynomial of degree {m} over GF({p})")
    GF = galois.GF(p) if m == 1 else galois.GF(q, irreducible_poly=poly)

    exp_table = np.zeros(q - 1, dtype=np.int64)
    log_table = np.full(q, -1, dtype=np.int64)
    g = GF.primitive_element
    exp_table[:] = to_ints(g ** np.arange(q - 1))
    log_table[exp_table] = np.arange(q - 1)
    if len(np.unique(exp_table)) != q - 1:
        raise InternalError(f"exp table of GF({q}) does not cycle with period q-1")

    spec = FieldSpec(
        p=p,
        m=m,
        q=q,
        reduction_poly=tuple(int(c) for c in poly.coeffs),
        exp_table=exp_table,
        log_table=log_table,
        GF=GF,
    )
    log.debug("built %s with reduction polynomial %s", spec, poly)
    return spec


# ---------------------------------------------------------------------------
# Scalar arithmetic
# ---------------------------------------------------------------------------

def field_add(a: int, b: int, f: FieldSpec) -> int:
    f.check(a), f.check(b)
    if f.p == 2:
        return a ^ b
    return int(f.GF(a) + f.GF(b))


def field_neg(a: int, f: FieldSpec) -> int:
    f.check(a)
    return a if f.p == 2 else int(-f.GF(a))


def field_sub(a: int, b: int, f: FieldSpec) -> int:
    return field_add(a, field_neg(b, f), f)


def field_mul(a: int, b: int, f: FieldSpec) -> int:
    f.check(a), f.check(b)
    if a == 0 or b == 0:
        return 0
    return int(f.exp_table[(f.log_table[a] + f.log_table[b]) % (f.q - 1)])


def field_inv(a: int, f: FieldSpec) -> int:
    if f.check(a) == 0:
        raise FieldError("division by zero: 0 has no inverse")
    return int(f.exp_table[(-f.log_table[a]) % (f.q - 1)])


def field_div(a: int, b: int, f: FieldSpec) -> int:
    return field_mul(a, field_inv(b, f), f)


# ---------------------------------------------------------------------------
# Vectors
# ---------------------------------------------------------------------------

def dot_product(v: Sequence[int], w: Sequence[int], f: FieldSpec) -> int:
    """Sum of v_i * w_i in GF(q)."""
    if len(v) != len(w):
        raise ValidationError(f"length mismatch: {len(v)} vs {len(w)}")
    if not v:
        return 0
    return int(f.array(v) @ f.array(w))


def vec_add(v: Sequence[int], w: Sequence[int], f: FieldSpec) -> tuple[int, ...]:
    if len(v) != len(w):
        raise ValidationError(f"length mismatch: {len(v)} vs {len(w)}")
    return tuple(int(x) for x in f.array(v) + f.array(w))


def vec_sub(v: Sequence[int], w: Sequence[int], f: FieldSpec) -> tuple[int, ...]:
    if len(v) != len(w):
        raise ValidationError(f"length mismatch: {len(v)} vs {len(w)}")
    return tuple(int(x) for x in f.array(v) - f.array(w))


def vec_scale(beta: int, v: Sequence[int], f: FieldSpec) -> tuple[int, ...]:
    return tuple(field_mul(beta, a, f) for a in v)
