"""Counter-based random numbers (Philox4x32-10).

Every draw is a pure function of ``(seed, path, step)``, so a path is
reproducible no matter how paths are batched or in what order they run.
"""

import math

import numba as nb
import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)


@nb.njit(cache=True, inline="always")
def philox4x32(c0, c1, c2, c3, k0, k1):
    """Ten Philox rounds on a 128-bit counter with a 64-bit key.

    All arguments are uint64 holding 32-bit words; returns four such words.
    """
    for i in range(10):
        if i > 0:
            k0 = (k0 + _W0) & _MASK
            k1 = (k1 + _W1) & _MASK
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0 = p0 >> _S32
        lo0 = p0 & _MASK
        hi1 = p1 >> _S32
        lo1 = p1 & _MASK
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


@nb.njit(cache=True, inline="always")
def _split(x):
    x = np.uint64(x)
    return x & _MASK, x >> _S32


@nb.njit(cache=True)
def draw(seed, path, step, stream):
    """Return ``(u53, u32a, u32b)``: three uniforms in (0, 1) for one counter.

    ``stream`` separates independent uses of the same (path, step) pair.
    """
    k0, k1 = _split(seed)
    s0, s1 = _split(step)
    p0, p1 = _split(path)
    c3 = np.uint64(stream) & _MASK
    x0, x1, x2, x3 = philox4x32(s0, s1, p0, (p1 ^ (c3 << np.uint64(16))) & _MASK, k0, k1)
    u53 = (float((x0 << np.uint64(21)) ^ (x1 >> np.uint64(11))) + 0.5) * 2.0**-53
    ua = (float(x2) + 0.5) * 2.0**-32
    ub = (float(x3) + 0.5) * 2.0**-32
    return u53, ua, ub


@nb.njit(cache=True)
def normal_pair(seed, path, step):
    """Two independent standard normals plus a spare uniform (Box-Muller)."""
    u, v, w = draw(seed, path, step, 0)
    rad = math.sqrt(-2.0 * math.log(u))
    ang = 2.0 * math.pi * v
    return rad * math.cos(ang), rad * math.sin(ang), w


@nb.njit(cache=True)
def uniform(seed, path, step, stream):
    return draw(seed, path, step, stream)[0]


def philox_words(counter, key):
    """Python-level entry point returning the four output words (for testing)."""
    c = [np.uint64(x) for x in counter]
    k = [np.uint64(x) for x in key]
    return tuple(int(x) for x in philox4x32(c[0], c[1], c[2], c[3], k[0], k[1]))
