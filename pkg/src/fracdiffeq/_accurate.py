"""Error-free transformations for sums that need more than double precision.

Used to evaluate defects of computed resolvent families: the defect is a
heavily cancelling sum, so it is formed from exact products and an
extraction-based summation that carries roughly twice the working precision.
"""

from __future__ import annotations

import math

import numpy as np

_SPLIT = 134217729.0  # 2**27 + 1


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def two_sum(a, b):
    """``(s, e)`` with ``s = fl(a + b)`` and ``s + e = a + b`` exactly."""
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def two_prod(a, b):
    """``(p, e)`` with ``p = fl(a * b)`` and ``p + e = a * b`` exactly
    (barring overflow and underflow)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def accurate_sum(terms, axis: int = 0):
    """Sum along ``axis``; returns ``(hi, lo)`` with ``hi + lo`` accurate to
    about ``m**2 * eps**2 * max|term|`` for ``m`` terms.

    Each term is split at a common power of two ``sigma`` into a high part,
    whose sum is exact, and a small remainder summed in double.
    """
    t = np.asarray(terms, dtype=float)
    m = t.shape[axis]
    mx = np.max(np.abs(t), axis=axis)
    safe = np.where(mx > 0, mx, 1.0)
    expo = np.ceil(np.log2(safe)).astype(int) + math.ceil(math.log2(m + 1)) + 1
    sigma = np.expand_dims(np.ldexp(1.0, expo), axis)
    high = (sigma + t) - sigma
    return two_sum(np.sum(high, axis=axis), np.sum(t - high, axis=axis))
