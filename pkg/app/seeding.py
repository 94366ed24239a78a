"""Deterministic seed derivation so parallel work never depends on scheduling."""

import numpy as np

SEED_MASK = (1 << 63) - 1


def derive_seed(seed: int, *keys: int) -> int:
    """Derive an independent 63-bit seed from a run seed and integer keys."""
    entropy = [int(seed) & ((1 << 64) - 1)] + [int(k) for k in keys]
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 32 | int(state[1])) & SEED_MASK)


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """PCG64 generator for a (seed, keys...) stream."""
    return np.random.Generator(np.random.PCG64(derive_seed(seed, *keys)))
