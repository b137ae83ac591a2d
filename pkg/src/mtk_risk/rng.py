"""Vectorised Philox4x32-10 counter-based generator.

Every draw is a pure function of ``(key, counter)``, so a Monte Carlo path
indexed by ``i`` that consumes its ``s``-th variate can be evaluated on any
worker, in any order, and still see the same bits.  Counter layout used by
:func:`uniform`::

    c0, c1 = low / high 32 bits of the path index
    c2     = step index
    c3     = stream tag (distinguishes independent variates per step)
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85
_LO = np.uint64(0xFFFFFFFF)
_SHIFT = np.uint64(32)
_U32 = 0xFFFFFFFF


def philox4x32(counter, key, rounds: int = 10):
    """Apply the Philox4x32 bijection.

    ``counter`` is a 4-sequence of uint32 arrays (broadcastable), ``key`` a
    pair of Python ints.  Returns four uint32 arrays.
    """
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint32) for c in counter)
    k0, k1 = int(key[0]) & _U32, int(key[1]) & _U32
    for r in range(rounds):
        p0 = _M0 * c0.astype(np.uint64)
        p1 = _M1 * c2.astype(np.uint64)
        hi0 = (p0 >> _SHIFT).astype(np.uint32)
        lo0 = (p0 & _LO).astype(np.uint32)
        hi1 = (p1 >> _SHIFT).astype(np.uint32)
        lo1 = (p1 & _LO).astype(np.uint32)
        c0, c1, c2, c3 = hi1 ^ c1 ^ np.uint32(k0), lo1, hi0 ^ c3 ^ np.uint32(k1), lo0
        if r < rounds - 1:
            k0 = (k0 + _W0) & _U32
            k1 = (k1 + _W1) & _U32
    return c0, c1, c2, c3


def seed_key(seed: int) -> tuple[int, int]:
    """Split a non-negative 64-bit seed into the two Philox key words."""
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise ConfigError(f"seed must lie in [0, 2**64), got {seed}")
    return seed & _U32, (seed >> 32) & _U32


def uniform(seed: int, index, step: int, stream: int = 0) -> np.ndarray:
    """53-bit uniforms in [0, 1) for the given path indices at one step."""
    index = np.asarray(index, dtype=np.uint64)
    c0 = (index & _LO).astype(np.uint32)
    c1 = (index >> _SHIFT).astype(np.uint32)
    c2 = np.full(c0.shape, step & _U32, dtype=np.uint32)
    c3 = np.full(c0.shape, stream & _U32, dtype=np.uint32)
    x0, x1, _, _ = philox4x32((c0, c1, c2, c3), seed_key(seed))
    a = (x0 >> np.uint32(5)).astype(np.float64)
    b = (x1 >> np.uint32(6)).astype(np.float64)
    return (a * 67108864.0 + b) / 9007199254740992.0


def derive_seed(seed: int, index: int) -> int:
    """Child seed for a sub-task (e.g. one grid point) of a seeded run."""
    hi = philox4x32((np.uint32(index & _U32), np.uint32((index >> 32) & _U32),
                     np.uint32(0xA5A5A5A5), np.uint32(1)), seed_key(seed))
    return (int(hi[0]) << 32) | int(hi[1])
