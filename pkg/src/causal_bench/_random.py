"""Seed derivation and random draws used by the simulator.

Every experiment owns a :class:`numpy.random.Generator` (PCG64, period 2**128)
seeded from ``mix64(base_seed, block_key, rep_index)``.  Seeds depend only on
the triple, never on scheduling or on which other blocks are in the grid.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1

# SplitMix64 constants (Steele, Lea & Flood, 2014).
_GOLDEN = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB


def splitmix64(x: int) -> int:
    """One SplitMix64 step: advance by the golden gamma, then avalanche."""
    z = (x + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * _MUL1) & _MASK
    z = ((z ^ (z >> 27)) * _MUL2) & _MASK
    return z ^ (z >> 31)


def mix64(*parts: int) -> int:
    """Fold integers into a single 64-bit seed.

    ``h = splitmix64(base); h = splitmix64(h ^ part)`` for each further part.
    Negative inputs are reduced modulo 2**64.
    """
    if not parts:
        raise ValueError("mix64 needs at least one part")
    h = splitmix64(parts[0] & _MASK)
    for p in parts[1:]:
        h = splitmix64(h ^ (p & _MASK))
    return h


def block_key(effect: float) -> int:
    """Integer identity of an effect block, independent of grid position."""
    return int(round(float(effect) * 1000))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & _MASK))


def box_muller(rng: np.random.Generator, n: int) -> np.ndarray:
    """Standard normal deviates via the Box-Muller transform.

    Draws ``ceil(n/2)`` uniform pairs; ``1 - u`` keeps the log argument in (0, 1].
    """
    m = (n + 1) // 2
    u1 = 1.0 - rng.random(m)
    u2 = rng.random(m)
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    z = np.empty(2 * m)
    z[0::2] = r * np.cos(theta)
    z[1::2] = r * np.sin(theta)
    return z[:n]


def bernoulli(rng: np.random.Generator, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return (rng.random(p.shape) < p).astype(np.int64)
