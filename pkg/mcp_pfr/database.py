"""The replicated store: K files x L layers, each layer a length-S record over GF(q).

Also the brute-force oracle every decoder is checked against, and the PFRD
file format used to hand the same replica to several server processes.
"""

from __future__ import annotations

import hashlib
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from mcp_pfr.errors import FieldError, ValidationError
from mcp_pfr.field import FieldSpec, field_make, to_ints

log = logging.getLogger(__name__)

MAGIC = b"PFRD"
VERSION = 1
_HEADER = struct.Struct("<4sBBBHII")


@dataclass(frozen=True, eq=False)
class DecodedStream:
    """L records of S elements: {vᵀ W[t]} in original layer order."""

    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ValidationError("a decoded stream is an (L, S) array")

    @property
    def L(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, DecodedStream):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def digest(self) -> str:
        body = np.ascontiguousarray(self.values, dtype="<u2").tobytes()
        return hashlib.sha256(body).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class Database:
    field: FieldSpec
    cells: np.ndarray  # (K, L, S) element indices

    def __post_init__(self):
        if self.cells.ndim != 3 or 0 in self.cells.shape:
            raise ValidationError(f"database cells must be a non-empty (K, L, S) array, got {self.cells.shape}")
        if self.cells.min() < 0 or self.cells.max() >= self.field.q:
            raise FieldError(f"database holds values outside GF({self.field.q})")
        self.cells.setflags(write=False)

    @property
    def K(self) -> int:
        return self.cells.shape[0]

    @property
    def L(self) -> int:
        return self.cells.shape[1]

    @property
    def S(self) -> int:
        return self.cells.shape[2]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Database):
            return NotImplemented
        return self.field == other.field and np.array_equal(self.cells, other.cells)

    def gf(self):
        return self.field.array(self.cells)

    def file(self, k: int) -> DecodedStream:
        """File k (1-based) as an (L, S) stream."""
        return DecodedStream(np.array(self.cells[k - 1], dtype=np.int64))

    # ── persistence ──────────────────────────────────────────────────

    def to_bytes(self) -> bytes:
        f = self.field
        if f.p > 0xFF or f.m > 0xFF:
            raise ValidationError(f"{f} does not fit the one-byte p/m header fields")
        if self.K > 0xFFFF:
            raise ValidationError(f"K={self.K} does not fit the u16 header field")
        header = _HEADER.pack(MAGIC, VERSION, f.p, f.m, self.K, self.L, self.S)
        return header + np.ascontiguousarray(self.cells, dtype="<u2").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Database":
        if len(data) < _HEADER.size:
            raise ValidationError("database file is truncated (no header)")
        magic, version, p, m, K, L, S = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise ValidationError(f"not a PFRD file (magic {magic!r})")
        if version != VERSION:
            raise ValidationError(f"unsupported PFRD version {version}")
        expected = _HEADER.size + 2 * K * L * S
        if len(data) != expected:
            raise ValidationError(f"database file has {len(data)} bytes, header implies {expected}")
        field = field_make(p, m)
        cells = np.frombuffer(data, dtype="<u2", offset=_HEADER.size).astype(np.int64)
        return cls(field, cells.reshape(K, L, S))

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_bytes(self.to_bytes())
        log.info("saved %s database K=%d L=%d S=%d to %s", self.field, self.K, self.L, self.S, path)
        return path

    @classmethod
    def load(cls, path: str | Path) -> "Database":
        return cls.from_bytes(Path(path).read_bytes())

    def digest(self) -> str:
        return hashlib.sha256(self.to_bytes()).hexdigest()[:16]


def db_generate(f: FieldSpec, K: int, L: int, S: int, seed: int | None = None) -> Database:
    """Uniform cells, reproducible for a fixed seed."""
    for name, value in (("K", K), ("L", L), ("S", S)):
        if value < 1:
            raise ValidationError(f"{name}={value} must be >= 1")
    cells = to_ints(f.GF.Random((K, L, S), seed=seed))
    return Database(f, cells)


def db_oracle(db: Database, v: Sequence[int]) -> DecodedStream:
    """Ground truth: output[t][s] = Σ_k v_k · W_k[t][s]."""
    if len(v) != db.K:
        raise ValidationError(f"coefficient vector has {len(v)} entries, database has K={db.K}")
    coeff = db.field.array(v)
    total = np.add.reduce(coeff[:, None, None] * db.gf(), axis=0)
    return DecodedStream(to_ints(total))
