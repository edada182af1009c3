"""Counter-based randomness.

Every random decision in the package is a pure function of
``(seed, trial, index)`` so that runs replay exactly regardless of how
trials are split across workers, and so that configurations at different
``p`` are coupled monotonically (site ``v`` is open at ``p`` iff its uniform
is below ``p``).

Mixing function: the splitmix64 finalizer

    z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27; z *= 0x94D049BB133111EB
    z ^= z >> 31

and ``uniform(seed, trial, v) = (mix(mix(seed + G*(trial+1)) + G*(v+1)) >> 11) * 2**-53``
with ``G = 0x9E3779B97F4A7C15``, all arithmetic modulo 2**64.
"""
from __future__ import annotations

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    z &= MASK64
    z ^= z >> 30
    z = (z * _M1) & MASK64
    z ^= z >> 27
    z = (z * _M2) & MASK64
    z ^= z >> 31
    return z


def fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & MASK64
    return h


def derive_seed(master: int, *parts: str | int) -> int:
    """Fold tags and integers into a 64-bit seed, deterministically."""
    h = mix64(int(master) & MASK64)
    for part in parts:
        v = fnv1a64(part) if isinstance(part, str) else int(part) & MASK64
        h = mix64((h ^ v) + GOLDEN)
    return h


def trial_key(seed: int, trial: int) -> int:
    return mix64((int(seed) + GOLDEN * (int(trial) + 1)) & MASK64)


def uniform(seed: int, trial: int, index: int) -> float:
    x = mix64((trial_key(seed, trial) + GOLDEN * (int(index) + 1)) & MASK64)
    return (x >> 11) * _INV53


def uniforms(seed: int, trial: int, n: int) -> np.ndarray:
    """Uniforms for indices ``0..n-1`` of one trial (vectorised)."""
    key = np.uint64(trial_key(seed, trial))
    idx = np.arange(1, n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = key + np.uint64(GOLDEN) * idx
        z ^= z >> np.uint64(30)
        z *= np.uint64(_M1)
        z ^= z >> np.uint64(27)
        z *= np.uint64(_M2)
        z ^= z >> np.uint64(31)
    return (z >> np.uint64(11)).astype(np.float64) * _INV53


def numpy_generator(seed: int, *parts: str | int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(seed, *parts)))


# numba kernels; all operands kept uint64 so nothing promotes to float.
@njit(cache=True)
def _mix64_nb(z):
    z ^= z >> np.uint64(30)
    z *= np.uint64(_M1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_M2)
    z ^= z >> np.uint64(31)
    return z


@njit(cache=True)
def trial_key_nb(seed, trial):
    return _mix64_nb(np.uint64(seed) + np.uint64(GOLDEN) * np.uint64(trial + 1))


@njit(cache=True)
def uniform_nb(key, index):
    x = _mix64_nb(np.uint64(key) + np.uint64(GOLDEN) * np.uint64(index + 1))
    return np.float64(x >> np.uint64(11)) * _INV53
