"""Values that cross the client/server boundary: requests, queries, answers."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from mcp_pfr.errors import DecodeError, ValidationError


@dataclass(frozen=True)
class Request:
    """Ask for Σ_j coeffs[j]ᵀ · W[layers[j]] (layers are 1-based)."""

    layers: tuple[int, ...]
    coeffs: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.layers:
            raise ValidationError("a request needs at least one term")
        if len(self.layers) != len(self.coeffs):
            raise ValidationError("request layers and coefficients differ in length")

    @property
    def terms(self) -> Iterator[tuple[int, tuple[int, ...]]]:
        return zip(self.layers, self.coeffs)


@dataclass(frozen=True)
class Query:
    """Everything one server receives. ``S == 0`` means the record length is unspecified."""

    server_id: int
    p: int
    m: int
    K: int
    L: int
    requests: tuple[Request, ...]
    S: int = 0

    def with_record_length(self, S: int) -> "Query":
        return replace(self, S=S)

    def layers_touched(self) -> set[int]:
        return {t for r in self.requests for t in r.layers}

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Padded (R, T) layers, (R, T, K) coefficients and a (R, T) mask of real terms."""
        R = len(self.requests)
        T = max((len(r.layers) for r in self.requests), default=0)
        layers = np.ones((R, T), dtype=np.int64)
        coeffs = np.zeros((R, T, self.K), dtype=np.int64)
        mask = np.zeros((R, T), dtype=bool)
        for i, r in enumerate(self.requests):
            if any(len(c) != self.K for c in r.coeffs):
                raise ValidationError(f"request {i} has a coefficient vector whose length is not K={self.K}")
            n = len(r.layers)
            layers[i, :n] = r.layers
            coeffs[i, :n] = r.coeffs
            mask[i, :n] = True
        return layers, coeffs, mask


@dataclass(frozen=True, eq=False)
class Answer:
    """One S-element record per request, in the query's transmission order."""

    values: np.ndarray  # (R, S)

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ValidationError("an answer is an (R, S) array")

    @property
    def count(self) -> int:
        return self.values.shape[0]

    @property
    def S(self) -> int:
        return self.values.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Answer):
            return NotImplemented
        return np.array_equal(self.values, other.values)


def check_alignment(queries_len: list[int], answers: list[Answer]) -> int:
    """Verify answer counts match and return the common record length S."""
    if len(queries_len) != len(answers):
        raise DecodeError(f"expected {len(queries_len)} answers, got {len(answers)}")
    lengths = {a.S for a in answers if a.count}
    if len(lengths) > 1:
        raise DecodeError(f"answers disagree on record length: {sorted(lengths)}")
    for n, (want, a) in enumerate(zip(queries_len, answers), start=1):
        if a.count != want:
            raise DecodeError(f"server {n} answered {a.count} requests, query had {want}")
    return lengths.pop() if lengths else 0
