"""Shared constants and elementary asymptotic sums.

Everything downstream (series remainders, kernel closed forms, trace
normalisations) is anchored on a handful of numbers:

    K  = (log 2pi - gamma + 1)/2          first-kernel constant
    K1 = (log 2pi - gamma + 2)/2 = K+1/2  second-kernel log coefficient
    K2 = (1-gamma/2) log 2pi + (log^2 2pi)/4 + pi^2/48
         - gamma^2/4 - gamma - gamma_1 + 3/2
    C1 = 2 gamma + gamma_1 - 3,  C2 = (log 2pi)/2 + 1 = K1 + gamma/2

together with zeta(2), the first three derivatives of zeta at 2, and the
reciprocal-zeta Taylor data eta_j = sum_n mu(n) log^j n / n^2 = (-1)^j
(1/zeta)^(j)(2).  gamma and gamma_1 (Euler's constant and the first
Stieltjes constant) are frozen as literals; everything else is computed.

The three elementary sum families

    H(x)   = sum_{k<=x} 1/k
    LS(x)  = sum_{k<=x} log k
    LK(x)  = sum_{k<=x} log(k)/k

are evaluated exactly (cached cumulative tables) below x = 1e4 and by their
Euler-Maclaurin / Stirling expansions at floor(x) above it.  The expansions
carry enough terms that the two branches agree to ~1e-13 at the crossover.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .accum import fsum_array

GAMMA = 0.57721566490153286060651209008240243104215933593992
GAMMA1 = -0.07281584548367672486058637587490131913773633833434
LOG_2PI = 1.8378770664093454835606594728112352797227949472756
ZETA2 = math.pi ** 2 / 6

EXACT_CUTOFF = 10_000  # exact summation below, floor-evaluated expansions above


# ---------------------------------------------------------------------------
# Bernoulli polynomials (degrees 2..6 are all the tails ever need)

_BERNOULLI_COEFFS = {
    2: (1.0, -1.0, 1.0 / 6.0),
    3: (1.0, -1.5, 0.5, 0.0),
    4: (1.0, -2.0, 1.0, 0.0, -1.0 / 30.0),
    5: (1.0, -2.5, 5.0 / 3.0, 0.0, -1.0 / 6.0, 0.0),
    6: (1.0, -3.0, 2.5, 0.0, -0.5, 0.0, 1.0 / 42.0),
}


def bernoulli_poly(j: int, t):
    """B_j(t) for j in 2..6, scalar or ndarray t."""
    if j not in _BERNOULLI_COEFFS:
        raise ValueError(f"bernoulli_poly: degree {j} not supported")
    c = _BERNOULLI_COEFFS[j]
    t = np.asarray(t, dtype=np.float64)
    out = np.full_like(t, c[0])
    for ck in c[1:]:
        out = out * t + ck
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# cached cumulative tables (index n holds the sum over k <= n)

@functools.lru_cache(maxsize=None)
def _tables(limit: int = EXACT_CUTOFF):
    n = np.arange(1, limit + 1, dtype=np.float64)
    logn = np.log(n)
    zero = np.zeros(1)
    harm = np.concatenate([zero, np.cumsum(1.0 / n)])
    logsum = np.concatenate([zero, np.cumsum(logn)])
    logoverk = np.concatenate([zero, np.cumsum(logn / n)])
    return harm, logsum, logoverk


def harmonic_table() -> np.ndarray:
    return _tables()[0]


def logsum_table() -> np.ndarray:
    return _tables()[1]


def logoverk_table() -> np.ndarray:
    return _tables()[2]


# ---------------------------------------------------------------------------
# scalar sum families

def harmonic_sum(x: float) -> float:
    """H(x) = sum_{k <= x} 1/k, exact below the crossover."""
    if x < 1.0:
        return 0.0
    b = int(math.floor(x))
    if b <= EXACT_CUTOFF:
        return float(harmonic_table()[b])
    return harmonic_asym(float(b))


def harmonic_asym(x: float) -> float:
    """log x + gamma + 1/(2x) - 1/(12x^2) + 1/(120x^4); error O(x^-6)."""
    if x < 2.0:
        raise ValueError("harmonic_asym: domain is x >= 2")
    ix = 1.0 / x
    ix2 = ix * ix
    return math.log(x) + GAMMA + 0.5 * ix - ix2 / 12.0 + ix2 * ix2 / 120.0


def _h_tail(b: float) -> float:
    """H(b) - log(b) - gamma for integer b >= 2, cancellation-free."""
    ib = 1.0 / b
    ib2 = ib * ib
    return 0.5 * ib - ib2 / 12.0 + ib2 * ib2 / 120.0 - ib2 * ib2 * ib2 / 252.0


def log_sum(x: float) -> float:
    """LS(x) = sum_{k <= x} log k   (= log floor(x)! )."""
    if x < 1.0:
        return 0.0
    b = int(math.floor(x))
    if b <= EXACT_CUTOFF:
        return float(logsum_table()[b])
    bf = float(b)
    return (bf * math.log(bf) - bf + 0.5 * math.log(bf) + 0.5 * LOG_2PI
            + _stirling_tail(bf))


def _stirling_tail(b: float) -> float:
    """LS(b) - (b log b - b + (log b)/2 + (log 2pi)/2); error O(b^-7)."""
    ib = 1.0 / b
    ib2 = ib * ib
    return ib / 12.0 - ib * ib2 / 360.0 + ib * ib2 * ib2 / 1260.0


def log_over_k_sum(x: float) -> float:
    """LK(x) = sum_{k <= x} log(k)/k."""
    if x < 1.0:
        return 0.0
    b = int(math.floor(x))
    if b <= EXACT_CUTOFF:
        return float(logoverk_table()[b])
    lb = math.log(b)
    return 0.5 * lb * lb + GAMMA1 + _logoverk_tail(float(b), lb)


def _logoverk_tail(b: float, lb: float) -> float:
    """LK(b) - (log^2 b)/2 - gamma_1; error O(b^-6 log b)."""
    ib = 1.0 / b
    ib2 = ib * ib
    return lb * ib / 2.0 + (1.0 - lb) * ib2 / 12.0 + (6.0 * lb - 11.0) * ib2 * ib2 / 720.0


# ---------------------------------------------------------------------------
# zeta and 1/zeta data at s = 2

def _logpow_deriv(terms: dict, order: int) -> dict:
    # basis log^a(x) * x^(-b); d/dx maps (a,b) -> a*(a-1,b+1) - b*(a,b+1)
    for _ in range(order):
        new: dict = {}
        for (a, b), c in terms.items():
            if a > 0:
                new[(a - 1, b + 1)] = new.get((a - 1, b + 1), 0.0) + c * a
            new[(a, b + 1)] = new.get((a, b + 1), 0.0) - c * b
        terms = new
    return terms


def _eval_logpow(terms: dict, x: float) -> float:
    lx = math.log(x)
    return math.fsum(c * lx ** a / x ** b for (a, b), c in terms.items())


@functools.lru_cache(maxsize=None)
def zeta_derivatives_at_2() -> tuple:
    """(zeta(2), zeta'(2), zeta''(2), zeta'''(2)) via Dirichlet series
    with Euler-Maclaurin tail; absolute accuracy well under 1e-12."""
    m = 2000
    n = np.arange(1, m, dtype=np.float64)
    logn = np.log(n)
    inv2 = 1.0 / (n * n)
    out = []
    for j in range(4):
        head = fsum_array(logn ** j * inv2)
        f = {(j, 2): 1.0}
        # integral of log^j x / x^2 from m to infty = (sum_i j!/i! log^i m)/m
        integ = math.fsum(math.factorial(j) / math.factorial(i) * math.log(m) ** i
                          for i in range(j + 1)) / m
        tail = (integ + _eval_logpow(f, m) / 2.0
                - _eval_logpow(_logpow_deriv(f, 1), m) / 12.0
                + _eval_logpow(_logpow_deriv(f, 3), m) / 720.0)
        out.append((head + tail) * (-1.0) ** j)
    return tuple(out)


@functools.lru_cache(maxsize=None)
def eta_constants() -> tuple:
    """eta_j = sum_n mu(n) log^j n / n^2 = (-1)^j (1/zeta)^(j)(2), j = 0..3,
    by the quotient rule applied to the zeta derivatives at 2."""
    z, z1, z2, z3 = zeta_derivatives_at_2()
    eta0 = 1.0 / z
    eta1 = z1 / z ** 2                    # -kappa'
    eta2 = (2.0 * z1 ** 2 - z * z2) / z ** 3
    eta3 = -(6.0 * z * z1 * z2 - z ** 2 * z3 - 6.0 * z1 ** 3) / z ** 4
    return eta0, eta1, eta2, eta3


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MathConstants:
    gamma: float
    gamma1: float
    log_2pi: float
    K: float
    K1: float
    K2: float
    C1: float
    C2: float
    zeta2: float
    zeta2_d1: float
    zeta2_d2: float
    zeta2_d3: float
    eta: tuple
    ell: tuple  # moment targets (0, 1, 2*gamma, 6*(gamma^2+gamma_1))


@functools.lru_cache(maxsize=None)
def constants() -> MathConstants:
    g, g1, l2p = GAMMA, GAMMA1, LOG_2PI
    K = (l2p - g + 1.0) / 2.0
    K1 = (l2p - g + 2.0) / 2.0
    K2 = ((1.0 - g / 2.0) * l2p + 0.25 * l2p * l2p + math.pi ** 2 / 48.0
          - g * g / 4.0 - g - g1 + 1.5)
    z, z1, z2, z3 = zeta_derivatives_at_2()
    return MathConstants(
        gamma=g, gamma1=g1, log_2pi=l2p,
        K=K, K1=K1, K2=K2,
        C1=2.0 * g + g1 - 3.0,
        C2=0.5 * l2p + 1.0,
        zeta2=z, zeta2_d1=z1, zeta2_d2=z2, zeta2_d3=z3,
        eta=eta_constants(),
        ell=(0.0, 1.0, 2.0 * g, 6.0 * (g * g + g1)),
    )


def clear_caches() -> None:
    """Drop all cached tables/constants (used by sensitivity probes)."""
    _tables.cache_clear()
    zeta_derivatives_at_2.cache_clear()
    eta_constants.cache_clear()
    constants.cache_clear()
