"""Server-side answer computation: a pure function of (database, query)."""

from __future__ import annotations

import logging

import numpy as np

from mcp_pfr.database import Database
from mcp_pfr.errors import ValidationError
from mcp_pfr.field import to_ints
from mcp_pfr.messages import Answer, Query

log = logging.getLogger(__name__)


def check_compatible(db: Database, query: Query) -> None:
    f = db.field
    if (query.p, query.m) != (f.p, f.m):
        raise ValidationError(f"query is over GF({query.p}^{query.m}), database over {f}")
    if query.K != db.K:
        raise ValidationError(f"query has K={query.K}, database has K={db.K}")
    if query.L != db.L:
        raise ValidationError(f"query expects L={query.L} layers, database has L={db.L}")
    if query.S and query.S != db.S:
        raise ValidationError(f"query expects S={query.S}, database has S={db.S}")


def answer_query(db: Database, query: Query) -> Answer:
    """For each request return Σ_j coeff_jᵀ · W[layer_j] as an S-element record."""
    check_compatible(db, query)
    if not query.requests:
        return Answer(np.zeros((0, db.S), dtype=np.int64))
    layers, coeffs, mask = query.as_arrays()
    if layers.min() < 1 or layers.max() > db.L:
        bad = int(layers.max()) if layers.max() > db.L else int(layers.min())
        raise ValidationError(f"layer {bad} outside [1, {db.L}]")
    coeffs[~mask] = 0

    f = db.field
    W = db.gf()  # (K, L, S)
    gathered = W[:, layers - 1, :]  # (K, R, T, S)
    c = f.array(np.moveaxis(coeffs, 2, 0))[..., None]  # (K, R, T, 1)
    products = c * gathered
    R, T = layers.shape
    summed = np.add.reduce(np.moveaxis(products, 0, 2).reshape(R, T * db.K, db.S), axis=1)
    log.debug("answered %d requests (%d terms max) for server %d", R, T, query.server_id)
    return Answer(to_ints(summed))
