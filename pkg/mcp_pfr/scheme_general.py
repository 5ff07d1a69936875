"""N-server scheme over GF(q).

Setup fixes N-1 nonzero Vandermonde nodes and a column permutation π′ of V.
Every (N-1)-tuple of nonzero vectors is one round, one request per server:

  Step 2, tuples not all parallel to v(θ), slots b..b+N-2 (b = m(N-1)):
    server 1:  Σ_j u_jᵀ W̃[b+j]
    server n:  Σ_j (u_j + Ṽ[j, n-2] v(θ))ᵀ W̃[b+j]            (n = 2..N)
  Step 3, tuples inside the parallel class, slots c..c+N-1 (c = base + mN):
    server 1:  Σ_j u_jᵀ W̃[c+j]
    server n:  Σ_j Ṽ[j, n-1] u_jᵀ W̃[c+j]                      (n = 2..N-1)
    server N:  same as server 1 but the last term reads slot c+N-1

Step-2 differences give Ṽᵀ·y; Step-3 gives [1; Ṽ[:,1:]ᵀ]·(β_j y_j) plus one
extra layer from server N. Column indices above are 0-based.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from mcp_pfr.database import DecodedStream
from mcp_pfr.errors import InternalError, ValidationError
from mcp_pfr.field import FieldSpec, to_ints
from mcp_pfr.messages import Answer, Query, Request, check_alignment
from mcp_pfr.projspace import (
    canonical_count,
    nonzero_array,
    parallel_mask,
    theta_vector,
    tuple_count,
    tuple_indices,
)
from mcp_pfr.rng import make_rng, permutation

log = logging.getLogger(__name__)

MAX_SETUP_DRAWS = 1000
STEP2 = 2
STEP3 = 3
MUTATIONS = ("skip_step3", "no_shift")


@dataclass(frozen=True, eq=False)
class GeneralSetup:
    N: int
    K: int
    field: FieldSpec
    alphas: tuple[int, ...]
    V: np.ndarray
    col_perm: tuple[int, ...]  # 0-based: column c of Ṽ is column col_perm[c] of V
    V_tilde: np.ndarray
    step2_inverse: np.ndarray
    step3_inverse: np.ndarray

    def step2_matrix(self):
        return self.field.array(_step2_rows(self.V_tilde))

    def step3_matrix(self):
        return self.field.array(_step3_rows(self.V_tilde))


@dataclass(frozen=True, eq=False)
class RoundMap:
    """Rounds in execution order: all Step-2 rounds, then all Step-3 rounds."""

    tuples: np.ndarray  # (M, N-1) indices into nonzero_array
    steps: np.ndarray  # (M,) STEP2 or STEP3
    offsets: np.ndarray  # (M,) first 0-based slot of the round's layer block

    @property
    def step2_rounds(self) -> int:
        return int(np.count_nonzero(self.steps == STEP2))

    @property
    def step3_rounds(self) -> int:
        return int(np.count_nonzero(self.steps == STEP3))


@dataclass(frozen=True, eq=False)
class GeneralPlan:
    setup: GeneralSetup
    theta: int
    L: int
    layer_perm: np.ndarray  # layer_perm[t] = π(t+1), 1-based layer for 0-based slot t
    round_map: RoundMap
    provenance: tuple[np.ndarray, ...]  # per server: round index of each transmitted request
    betas: np.ndarray  # (step3 rounds, N-1) scalars with u_j = β_j v(θ)

    @property
    def request_counts(self) -> list[int]:
        return [len(p) for p in self.provenance]


def general_layers(N: int, K: int, q: int) -> int:
    return (N - 1) * tuple_count(q, K, N) + (q - 1) ** (N - 1)


def _step2_rows(V_tilde: np.ndarray) -> np.ndarray:
    """Server n-1's Step-2 difference row is column n-1 of Ṽ."""
    return np.ascontiguousarray(V_tilde.T)


def _step3_rows(V_tilde: np.ndarray) -> np.ndarray:
    """Server 1 sums with ones; servers 2..N-1 use columns 1..N-2 of Ṽ."""
    ones = np.ones((1, V_tilde.shape[1]), dtype=np.int64)
    return np.concatenate([ones, V_tilde[:, 1:].T], axis=0)


def _invertible(matrix) -> bool:
    return int(np.linalg.det(matrix)) != 0


def setup_general(N: int, K: int, f: FieldSpec, seed: int | None = None) -> GeneralSetup:
    """Nodes are the first N-1 nonzero elements; π′ is redrawn until both decode matrices are invertible."""
    if N < 2:
        raise ValidationError(f"N={N} must be >= 2")
    if K < 1:
        raise ValidationError(f"K={K} must be >= 1")
    if f.q < N:
        raise ValidationError(f"need q >= N, got q={f.q} < N={N}")

    alphas = tuple(f.elements[1:N])
    nodes = f.array(alphas)
    V = np.stack([to_ints(nodes**e) for e in range(N - 1)], axis=1)
    if not _invertible(f.array(V)):
        raise InternalError(f"Vandermonde matrix over {f} with nodes {alphas} is singular")

    rng = make_rng(seed)
    for draw in range(1, MAX_SETUP_DRAWS + 1):
        col_perm = tuple(permutation(N - 1, rng))
        V_tilde = V[:, list(col_perm)]
        step2 = f.array(_step2_rows(V_tilde))
        step3 = f.array(_step3_rows(V_tilde))
        if _invertible(step2) and _invertible(step3):
            log.debug("setup N=%d over %s accepted pi'=%s after %d draw(s)", N, f, col_perm, draw)
            return GeneralSetup(
                N=N,
                K=K,
                field=f,
                alphas=alphas,
                V=V,
                col_perm=col_perm,
                V_tilde=V_tilde,
                step2_inverse=to_ints(np.linalg.inv(step2)),
                step3_inverse=to_ints(np.linalg.inv(step3)),
            )
    raise InternalError(f"no admissible column permutation after {MAX_SETUP_DRAWS} draws")


def _tuple_keys(coeffs: np.ndarray, q: int) -> np.ndarray:
    """Mixed-radix key per (R, N-1, K) tuple; -1 where a component is the zero vector."""
    K = coeffs.shape[-1]
    powers = q ** np.arange(K - 1, -1, -1, dtype=np.int64)
    comp = coeffs @ powers - 1  # nonzero_array index, -1 for zero
    base = q**K - 1
    keys = np.zeros(coeffs.shape[0], dtype=np.int64)
    for j in range(coeffs.shape[1]):
        keys = keys * base + comp[:, j]
    keys[(comp < 0).any(axis=1)] = -1
    return keys


def _covers_all_tuples(coeffs: np.ndarray, q: int) -> bool:
    keys = _tuple_keys(coeffs, q)
    return np.array_equal(np.sort(keys), np.arange(len(keys)))


def plan_general(
    setup: GeneralSetup,
    theta: int,
    seed: int | None = None,
    *,
    randomize: bool = True,
    mutation: str | None = None,
) -> tuple[list[Query], GeneralPlan]:
    """Build the N queries for retrieving v(θ)ᵀW."""
    if mutation is not None and mutation not in MUTATIONS:
        raise ValidationError(f"unknown mutation {mutation!r}; choose from {MUTATIONS}")
    f, N, K = setup.field, setup.N, setup.K
    q = f.q
    if not 1 <= theta <= canonical_count(q, K):
        raise ValidationError(f"theta={theta} outside [1, {canonical_count(q, K)}]")

    nz = nonzero_array(q, K)
    tuples = tuple_indices(q, K, N)
    parallel = parallel_mask(theta, f, K)[tuples].all(axis=1)
    t2, t3 = tuples[~parallel], tuples[parallel]
    if mutation == "skip_step3":
        t3 = t3[:0]
    R2, R3 = len(t2), len(t3)
    L = general_layers(N, K, q)
    base = (N - 1) * R2

    v_theta = f.array(theta_vector(theta, q, K))
    lead = int(np.flatnonzero(to_ints(v_theta))[0])
    Vt = f.array(setup.V_tilde)
    C2 = f.array(nz[t2])  # (R2, N-1, K)
    C3 = f.array(nz[t3])  # (R3, N-1, K)

    slots2 = (np.arange(R2)[:, None] * (N - 1) + np.arange(N - 1)[None, :]).astype(np.int64)
    slots3 = (base + np.arange(R3)[:, None] * N + np.arange(N - 1)[None, :]).astype(np.int64)
    slots3_last = slots3.copy()
    slots3_last[:, N - 2] += 1

    per_server = []
    for n in range(1, N + 1):
        if n == 1 or mutation == "no_shift":
            c2 = C2
        else:
            c2 = C2 + Vt[:, n - 2][None, :, None] * v_theta[None, None, :]
        if 2 <= n <= N - 1:
            c3 = C3 * Vt[:, n - 1][None, :, None]
        else:
            c3 = C3
        s3 = slots3_last if n == N else slots3
        coeffs = np.concatenate([to_ints(c2), to_ints(c3)], axis=0)
        slots = np.concatenate([slots2, s3], axis=0)
        per_server.append((coeffs, slots))

    if mutation is None:
        _check_plan_invariants(per_server, f, N, R2, theta, K)

    rng = make_rng(seed)
    perm = np.asarray(permutation(L, rng, randomize), dtype=np.int64) + 1

    queries, provenance = [], []
    for n, (coeffs, slots) in enumerate(per_server, start=1):
        order = np.asarray(permutation(len(coeffs), rng, randomize), dtype=np.int64)
        layers = perm[slots[order]].tolist()
        coeff_rows = coeffs[order].tolist()
        requests = tuple(
            Request(layers=tuple(ls), coeffs=tuple(tuple(c) for c in cs))
            for ls, cs in zip(layers, coeff_rows)
        )
        queries.append(Query(n, f.p, f.m, K, L, requests))
        provenance.append(order)

    round_map = RoundMap(
        tuples=np.concatenate([t2, t3], axis=0),
        steps=np.concatenate([np.full(R2, STEP2), np.full(R3, STEP3)]).astype(np.int64),
        offsets=np.concatenate([slots2[:, 0], slots3[:, 0]]).astype(np.int64),
    )
    betas = nz[t3][:, :, lead] if R3 else np.zeros((0, N - 1), dtype=np.int64)
    plan = GeneralPlan(setup, theta, L, perm, round_map, tuple(provenance), betas)
    log.debug(
        "general plan N=%d q=%d K=%d theta=%d: %d step-2 + %d step-3 rounds, L=%d",
        N, q, K, theta, R2, R3, L,
    )
    return queries, plan


def _check_plan_invariants(per_server, f: FieldSpec, N: int, R2: int, theta: int, K: int) -> None:
    q = f.q
    if not _covers_all_tuples(per_server[0][0], q):
        raise InternalError("server 1 does not see every tuple of 𝒱_N exactly once")
    if N == 2 and not _covers_all_tuples(per_server[1][0], q):
        raise InternalError("shifted tuples of server 2 do not cover 𝒱_N")
    mask = parallel_mask(theta, f, K)
    powers = q ** np.arange(K - 1, -1, -1, dtype=np.int64)
    for n in range(2, N):
        scaled = per_server[n - 1][0][R2:]
        comp = scaled @ powers - 1
        if (comp < 0).any() or not mask[comp].all():
            raise InternalError(f"server {n} step-3 tuples leave the parallel class of v(θ)")
    for n in range(2, N + 1):
        zeros = int((~per_server[n - 1][0][:R2].any(axis=2)).any(axis=1).sum())
        if zeros:
            log.debug("server %d receives %d step-2 requests with a zero coefficient vector", n, zeros)


def decode_general(plan: GeneralPlan, answers: list[Answer]) -> DecodedStream:
    """Recover {v(θ)ᵀW[t]} for all L layers, original order."""
    setup = plan.setup
    f, N = setup.field, setup.N
    S = check_alignment(plan.request_counts, answers)
    M = len(plan.round_map.steps)
    R2 = plan.round_map.step2_rounds
    R3 = M - R2

    rounds = np.zeros((N, M, S), dtype=np.int64)
    for n, (prov, answer) in enumerate(zip(plan.provenance, answers)):
        rounds[n, prov] = answer.values
    vals = f.array(rounds)
    slots = np.zeros((plan.L, S), dtype=np.int64)
    filled = np.zeros(plan.L, dtype=bool)

    if R2:
        diffs = vals[1:, :R2] - vals[0:1, :R2]  # (N-1, R2, S)
        inv2 = f.array(setup.step2_inverse)
        y = (inv2 @ diffs.reshape(N - 1, -1)).reshape(N - 1, R2, S)
        idx = plan.round_map.offsets[:R2][None, :] + np.arange(N - 1)[:, None]
        slots[idx] = to_ints(y)
        filled[idx] = True

    if R3:
        rhs = vals[: N - 1, R2:]  # servers 1..N-1
        inv3 = f.array(setup.step3_inverse)
        x = (inv3 @ rhs.reshape(N - 1, -1)).reshape(N - 1, R3, S)  # x_j = β_j y_j
        betas = f.array(plan.betas.T)[:, :, None]  # (N-1, R3, 1)
        y = x / betas
        extra = vals[N - 1, R2:] - np.add.reduce(x[: N - 2], axis=0) if N > 2 else vals[N - 1, R2:]
        extra = extra / betas[N - 2]
        offsets = plan.round_map.offsets[R2:]
        idx = offsets[None, :] + np.arange(N - 1)[:, None]
        slots[idx] = to_ints(y)
        slots[offsets + N - 1] = to_ints(extra)
        filled[idx] = True
        filled[offsets + N - 1] = True

    if not filled.all():
        log.warning("decoded %d of %d layers; the plan leaves layers unrecovered", int(filled.sum()), plan.L)
    out = np.zeros_like(slots)
    out[plan.layer_perm - 1] = slots
    return DecodedStream(out)
