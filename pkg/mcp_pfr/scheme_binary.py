"""Two-server scheme with binary coefficients.

Layers are relabelled through a secret permutation π (slot t reads layer
π(t)). With n = 2^K - 1 and L = 2^{K+1}:

  server 1: v(i) on slot i;        v(θ) on slot 2n+1;  (v(θ)-v(i)) on slot n+i, i≠θ
  server 2: v(i) on slot n+i;      v(θ) on slot 2n+2;  (v(θ)-v(i)) on slot i,   i≠θ

Each server gets 2^{K+1}-2 single-term requests in an independent random
order. Pairing a "phase1" answer from one server with the "pair" answer on the
same slot from the other yields v(θ)ᵀW on that slot.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from mcp_pfr.database import DecodedStream
from mcp_pfr.errors import DecodeError, InternalError, ValidationError
from mcp_pfr.field import field_make, to_ints, vec_sub
from mcp_pfr.messages import Answer, Query, Request, check_alignment
from mcp_pfr.projspace import enum_canonical
from mcp_pfr.rng import make_rng, permutation

log = logging.getLogger(__name__)

PHASE1 = "phase1"
DIRECT = "direct"
PAIR = "pair"

MUTATIONS = ("drop_pairs", "drop_direct")


@dataclass(frozen=True)
class Provenance:
    """Role of one transmitted request and where it sat before the shuffle."""

    role: str
    index: int
    position: int


@dataclass(frozen=True)
class BinaryPlan:
    theta: int
    K: int
    L: int
    layer_perm: tuple[int, ...]  # layer_perm[t-1] = π(t), 1-based
    provenance: tuple[tuple[Provenance, ...], tuple[Provenance, ...]]

    @property
    def request_counts(self) -> list[int]:
        return [len(p) for p in self.provenance]


def binary_layers(K: int) -> int:
    return 2 ** (K + 1)


def plan_binary(
    K: int,
    theta: int,
    seed: int | None = None,
    *,
    randomize: bool = True,
    mutation: str | None = None,
) -> tuple[Query, Query, BinaryPlan]:
    """Build both servers' queries for retrieving v(θ)ᵀW."""
    if K < 1:
        raise ValidationError(f"K={K} must be >= 1")
    if mutation is not None and mutation not in MUTATIONS:
        raise ValidationError(f"unknown mutation {mutation!r}; choose from {MUTATIONS}")
    f = field_make(2, 1)
    vectors = enum_canonical(2, K)
    n = len(vectors)
    if not 1 <= theta <= n:
        raise ValidationError(f"theta={theta} outside [1, {n}]")
    L = binary_layers(K)
    v_theta = vectors[theta - 1]

    pairs = {i: vec_sub(v_theta, vectors[i - 1], f) for i in range(1, n + 1) if i != theta}
    if set(pairs.values()) != set(vectors) - {v_theta}:
        raise InternalError("{v(θ)+v(i) : i≠θ} does not equal 𝒱 minus v(θ)")

    # (role, index, slot, coeff) before shuffling, slots 1-based
    layout: list[list[tuple[str, int, int, tuple[int, ...]]]] = [[], []]
    for i, v in enumerate(vectors, start=1):
        layout[0].append((PHASE1, i, i, v))
        layout[1].append((PHASE1, i, n + i, v))
    if mutation != "drop_direct":
        layout[0].append((DIRECT, 0, 2 * n + 1, v_theta))
        layout[1].append((DIRECT, 0, 2 * n + 2, v_theta))
    if mutation != "drop_pairs":
        for i, coeff in pairs.items():
            layout[0].append((PAIR, i, n + i, coeff))
            layout[1].append((PAIR, i, i, coeff))

    rng = make_rng(seed)
    perm = tuple(t + 1 for t in permutation(L, rng, randomize))

    queries, provenance = [], []
    for server, entries in enumerate(layout, start=1):
        order = permutation(len(entries), rng, randomize)
        requests, prov = [], []
        for pos in order:
            role, index, slot, coeff = entries[pos]
            requests.append(Request(layers=(perm[slot - 1],), coeffs=(coeff,)))
            prov.append(Provenance(role, index, pos))
        queries.append(Query(server, 2, 1, K, L, tuple(requests)))
        provenance.append(tuple(prov))

    plan = BinaryPlan(theta, K, L, perm, (provenance[0], provenance[1]))
    log.debug("binary plan K=%d theta=%d: %s requests per server", K, theta, plan.request_counts)
    return queries[0], queries[1], plan


def decode_binary(plan: BinaryPlan, a1: Answer, a2: Answer) -> DecodedStream:
    """Recover {v(θ)ᵀW[t]} in original layer order."""
    S = check_alignment(plan.request_counts, [a1, a2])
    f = field_make(2, 1)
    n = 2**plan.K - 1

    by_role: list[dict[tuple[str, int], np.ndarray]] = []
    for prov, answer in zip(plan.provenance, (a1, a2)):
        by_role.append({(p.role, p.index): answer.values[k] for k, p in enumerate(prov)})
    s1, s2 = by_role

    def get(side: dict, role: str, index: int) -> np.ndarray:
        try:
            return f.array(side[(role, index)])
        except KeyError:
            raise DecodeError(f"plan has no {role} request #{index}") from None

    slots = np.zeros((plan.L, S), dtype=np.int64)
    for i in range(1, n + 1):
        if i == plan.theta:
            low = get(s1, PHASE1, i)
            high = get(s2, PHASE1, i)
        else:
            low = get(s1, PHASE1, i) + get(s2, PAIR, i)
            high = get(s2, PHASE1, i) + get(s1, PAIR, i)
        slots[i - 1] = to_ints(low)
        slots[n + i - 1] = to_ints(high)
    slots[2 * n] = to_ints(get(s1, DIRECT, 0))
    slots[2 * n + 1] = to_ints(get(s2, DIRECT, 0))

    out = np.empty_like(slots)
    out[np.asarray(plan.layer_perm) - 1] = slots
    return DecodedStream(out)
