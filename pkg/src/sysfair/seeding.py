"""Replication seed derivation.

``derive_seed(base, i) = mix64(base + (i + 1) * GOLDEN_GAMMA mod 2**64)`` where
``mix64`` is the SplitMix64 finalizer::

    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)

``GOLDEN_GAMMA = 0x9E3779B97F4A7C15`` is odd, so the pre-image is injective in
``i`` for all ``i < 2**64``; the finalizer is a bijection on 64-bit words, so
derived seeds never collide at a fixed base seed, and for a fixed index every
distinct base seed yields a distinct derived seed.
"""

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, replication_index: int) -> int:
    if replication_index < 0:
        raise ValueError(f"replication_index must be >= 0, got {replication_index}")
    return mix64((base_seed & MASK64) + (replication_index + 1) * GOLDEN_GAMMA)
