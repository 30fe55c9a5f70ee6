"""Counter-based uniforms: every draw is a pure function of (seed, path, slot).

The stream for path ``i`` is keyed by the i-th output of SplitMix64 seeded
with ``seed``; draw number ``k`` on that path is the k-th SplitMix64 output
seeded with the key.  Nothing is carried between draws, so a path can be
regenerated alone and the result does not depend on how paths are batched
or which thread produced them.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer on a uint64 array (arithmetic wraps mod 2^64)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _nth(state, n) -> np.ndarray:
    """The n-th (1-based) output of SplitMix64 started at ``state``."""
    with np.errstate(over="ignore"):
        return mix64(np.asarray(state, dtype=np.uint64) + np.asarray(n, dtype=np.uint64) * GOLDEN)


def path_keys(seed: int, paths) -> np.ndarray:
    paths = np.asarray(paths, dtype=np.uint64)
    return _nth(np.uint64(int(seed) & _MASK), paths + np.uint64(1))


def uniforms(seed: int, paths, slot: int) -> np.ndarray:
    """Uniform(0,1) draws for the given path indices at draw number ``slot``.

    Values are odd multiples of 2^-54, so 0 and 1 never occur.
    """
    bits = _nth(path_keys(seed, paths), np.uint64(slot + 1))
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
