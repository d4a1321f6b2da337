"""Compensated summation helpers.

Long sums (1e5 terms and beyond) accumulate rounding at a rate that matters
for the 1e-10 .. 1e-12 tolerances used throughout this package.  Python's
math.fsum is error-free but slow on large numpy arrays, so array reductions
go chunkwise: numpy's pairwise sum inside each chunk, fsum across the chunk
totals.  Scalar streaming accumulation uses Kahan compensation.
"""

from __future__ import annotations

import math

import numpy as np

_CHUNK = 1 << 16


def fsum_array(a: np.ndarray) -> float:
    """Sum a 1-d float array with compensated accumulation."""
    a = np.asarray(a, dtype=np.float64).ravel()
    if a.size <= _CHUNK:
        return float(math.fsum(a)) if a.size < 2048 else _chunked(a)
    return _chunked(a)


def _chunked(a: np.ndarray) -> float:
    # pairwise partial sums are accurate to ~log2(chunk)*eps relative;
    # fsum over the partials removes the cross-chunk error entirely.
    parts = [float(np.sum(a[i:i + _CHUNK])) for i in range(0, a.size, _CHUNK)]
    return float(math.fsum(parts))


class Kahan:
    """Streaming compensated accumulator (scalar adds and array adds)."""

    __slots__ = ("s", "c")

    def __init__(self, s: float = 0.0):
        self.s = float(s)
        self.c = 0.0

    def add(self, x: float) -> None:
        y = x - self.c
        t = self.s + y
        self.c = (t - self.s) - y
        self.s = t

    def add_array(self, a: np.ndarray) -> None:
        self.add(fsum_array(a))

    @property
    def total(self) -> float:
        # c holds the overshoot absorbed by the last add; folding it
        # back in recovers ~one extra rounding's worth of accuracy
        return self.s - self.c
