"""Client-side randomness: layer permutations and transmission shuffles."""

from __future__ import annotations

import random
import secrets


def make_rng(seed: int | None = None) -> random.Random:
    """Seeded generator for reproducible runs; OS entropy when no seed is given."""
    if seed is None:
        return secrets.SystemRandom()
    return random.Random(seed)


def permutation(n: int, rng: random.Random, randomize: bool = True) -> list[int]:
    """A permutation of range(n); the identity when ``randomize`` is off."""
    order = list(range(n))
    if randomize:
        rng.shuffle(order)
    return order
