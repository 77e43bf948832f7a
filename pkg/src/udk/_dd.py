"""Vectorized double-double arithmetic (error-free transforms on float64 arrays)."""

from __future__ import annotations

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def add(ah, al, bh, bl):
    s, e = two_sum(ah, bh)
    e = e + (al + bl)
    return quick_two_sum(s, e)


def scale_int(counts, hi, lo):
    """counts * (hi + lo) for integer-valued float64 counts below 2**53."""
    p, e = two_prod(counts, hi)
    e = e + counts * lo
    return quick_two_sum(p, e)


def from_mpf(value):
    """Split a high-precision mpmath number into (hi, lo) floats."""
    hi = float(value)
    lo = float(value - hi)
    return hi, lo


def zeros(n):
    return np.zeros(n, dtype=np.float64), np.zeros(n, dtype=np.float64)
