"""MacLeod-type exact identities, Phi sums, a strip zeta evaluator, and
the critical-zero Perron comparison.

The two identity checks couple the Mobius sieve, the remainder kernels
R_q, and the L/M summatory machinery through relations that hold for
every real x >= 1:

    (1-gamma) L_0(x) - M_0(x)/(2x)
        = dLbar_0(x) log x - Phi_1(x)/x + 1/x            (exact)

    C_1 L_0(x) + C_2 M_0(x)/x
        = (log x/2)(dLbar_0(x) log x - dLbar_1(x) - dM_0(x)/x)
          - (2-gamma) dLbar_0(x) log x + Phi_2(x)/x + O(log x / x)

with Phi_q(x) = sum_{n<=x} mu(n) (x/n) R_q(x/n).  Every dLbar_j log x
product is expanded (Lbar_j log x - Lbar_{j+1}) before evaluation so
x = 1 is regular.  The first is exact to rounding; the second carries
an explicit O(log x/x) slack whose constant is pinned empirically.

The zeta evaluator is plain Euler-Maclaurin on the strip (enough for
imaginary parts up to a few thousand); zeros of zeta are ingested from
a text file and re-verified, never computed here.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import constants as cn
from .accum import fsum_array
from .arith import mobius_sieve
from .errors import (DataFormatError, InvalidArgumentError, NumericalError)
from .muntz import _r1_vec, _r2_vec, r1, r2

T_MAX = 1.0e4

# slack constant for the second identity: |residual| * x / log x tops
# out at 1.87 (x = 10) over x in {10, ..., 10^5} and shrinks from
# there; frozen at the fitted maximum with a x3 safety factor
LMREL2_C = 5.7


# ---------------------------------------------------------------------------
# Phi sums and MacLeod-type identity checks

def phi_cap(q: int, x: float) -> float:
    """Phi_q(x) = sum_{n<=x} mu(n) phi_q(x/n), phi_q(y) = y R_q(y)."""
    if q not in (1, 2):
        raise InvalidArgumentError(f"phi_cap: q must be 1 or 2, got {q}")
    if x < 1.0:
        raise InvalidArgumentError("phi_cap: x must be >= 1")
    nx = int(math.floor(x))
    mu = mobius_sieve(nx).mu[1:nx + 1].astype(np.float64)
    y = x / np.arange(1, nx + 1, dtype=np.float64)
    rv = _r1_vec(y) if q == 1 else _r2_vec(y)
    return fsum_array(mu * y * rv)


@dataclass(frozen=True)
class MacLeodResidual:
    x: float
    lhs: float
    rhs: float
    residual: float
    slack_budget: float


def _lm_sums(x: float) -> dict:
    """Mobius L_j(x), M_j(x) for j <= 2 at a real cutoff."""
    nx = int(math.floor(x))
    mu = mobius_sieve(nx).mu[1:nx + 1].astype(np.float64)
    n = np.arange(1, nx + 1, dtype=np.float64)
    logn = np.log(n)
    out = {}
    for j in range(3):
        lp = logn ** j
        out[f"l{j}"] = float(math.fsum(mu * lp / n))
        out[f"m{j}"] = float(math.fsum(mu * lp))
    return out

def macleod_check_1(x: float) -> MacLeodResidual:
    """Exact identity linking L_0, M_0 and Phi_1; residual ~ rounding."""
    if x < 1.0:
        raise InvalidArgumentError("macleod_check_1: x must be >= 1")
    c = cn.constants()
    s = _lm_sums(x)
    lx = math.log(x)
    lbar0 = s["l0"] + c.ell[0]
    lbar1 = s["l1"] + c.ell[1]
    lhs = (1.0 - c.gamma) * s["l0"] - 0.5 * s["m0"] / x
    # dLbar_0(x) log x expanded to avoid the log 1 = 0 division
    rhs = (lbar0 * lx - lbar1) - phi_cap(1, x) / x + 1.0 / x
    return MacLeodResidual(x=x, lhs=lhs, rhs=rhs, residual=lhs - rhs,
                           slack_budget=0.0)


def macleod_check_2(x: float) -> MacLeodResidual:
    """Second identity (R_2-based); carries an O(log x/x) slack term."""
    if x < 1.0:
        raise InvalidArgumentError("macleod_check_2: x must be >= 1")
    c = cn.constants()
    s = _lm_sums(x)
    lx = math.log(x)
    lbar0 = s["l0"] + c.ell[0]
    lbar1 = s["l1"] + c.ell[1]
    lbar2 = s["l2"] + c.ell[2]
    lhs = c.C1 * s["l0"] + c.C2 * s["m0"] / x
    rhs = (0.5 * lbar0 * lx * lx - lbar1 * lx + 0.5 * lbar2
           - (s["m0"] * lx - s["m1"]) / (2.0 * x)
           - (2.0 - c.gamma) * (lbar0 * lx - lbar1)
           + phi_cap(2, x) / x)
    budget = LMREL2_C * max(lx, 1.0) / x
    return MacLeodResidual(x=x, lhs=lhs, rhs=rhs, residual=lhs - rhs,
                           slack_budget=budget)


def phi_bound_report(q: int, x: float) -> tuple[float, float]:
    """(|Phi_q(x)|, integral_1^x |M_0(t)|/t dt + |R_q(1) M_0(x)|).

    Diagnostic only: the proportionality constants A_q are unknown, so
    callers look at the ratio.  M_0 is a step function, so the integral
    is an exact stepwise sum.
    """
    if q not in (1, 2):
        raise InvalidArgumentError(f"phi_bound_report: q must be 1 or 2")
    if x < 1.0:
        raise InvalidArgumentError("phi_bound_report: x must be >= 1")
    nx = int(math.floor(x))
    mu = mobius_sieve(nx).mu[1:nx + 1].astype(np.float64)
    m0 = np.cumsum(mu)
    n = np.arange(1, nx + 1, dtype=np.float64)
    width = np.log(np.minimum(n + 1.0, x)) - np.log(n)
    integral = fsum_array(np.abs(m0) * width)
    rq1 = r1(1.0) if q == 1 else r2(1.0)
    rhs = integral + abs(rq1 * m0[-1])
    return abs(phi_cap(q, x)), rhs


# ---------------------------------------------------------------------------
# zeta on the strip (Euler-Maclaurin)

_B2K = (1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730,
        7.0 / 6)  # B_2, B_4, ..., B_14


def _em_zeta(s: complex, want_prime: bool) -> complex:
    """Euler-Maclaurin zeta or zeta' with cutoff M ~ |Im s| + 20."""
    s = complex(s)
    if not 0.0 <= s.real <= 2.0:
        raise InvalidArgumentError(
            f"zeta evaluator: Re s = {s.real} outside the strip [0, 2]")
    if abs(s.imag) > T_MAX:
        raise InvalidArgumentError(
            f"zeta evaluator: |Im s| = {abs(s.imag)} exceeds {T_MAX}")
    if s == 1.0:
        raise InvalidArgumentError("zeta evaluator: pole at s = 1")
    big_m = int(abs(s.imag)) + 20
    n = np.arange(1, big_m, dtype=np.float64)
    logn = np.log(n)
    pw = np.exp(-s * logn)  # n^-s
    if want_prime:
        head = -np.sum(logn * pw)
    else:
        head = np.sum(pw)
    lm = math.log(big_m)
    m_pow = cmath.exp(-s * lm)  # M^-s
    if want_prime:
        # d/ds [M^{1-s}/(s-1)] and d/ds [M^-s/2]
        total = head - m_pow * big_m * (lm / (s - 1.0) + 1.0 / (s - 1.0) ** 2)
        total += -0.5 * lm * m_pow
    else:
        total = head + m_pow * big_m / (s - 1.0) + 0.5 * m_pow
    # correction terms B_2k/(2k)! * (s)(s+1)...(s+2k-2) * M^{-s-2k+1}
    poch = s  # running product (s)(s+1)...(s+2k-2)
    fact = 1.0
    hsum = 1.0 / s  # running sum 1/s + 1/(s+1) + ... for the derivative
    for k, b2k in enumerate(_B2K, start=1):
        fact *= (2 * k - 1) * (2 * k) if k > 1 else 2
        coeff = b2k / fact * poch
        tail_pow = m_pow * big_m ** (1 - 2 * k)
        if want_prime:
            total += coeff * tail_pow * (hsum - lm)
        else:
            total += coeff * tail_pow
        poch *= (s + 2 * k - 1) * (s + 2 * k)
        hsum += 1.0 / (s + 2 * k - 1) + 1.0 / (s + 2 * k)
    return complex(total)


def zeta_line(s: complex) -> complex:
    """zeta(s) on the strip 0 <= Re s <= 2, |Im s| <= 1e4."""
    return _em_zeta(s, want_prime=False)


def zeta_prime_line(s: complex) -> complex:
    """zeta'(s) on the same domain as zeta_line."""
    return _em_zeta(s, want_prime=True)


# ---------------------------------------------------------------------------
# zero ingestion and the Perron-type comparison

@dataclass(frozen=True)
class ZeroData:
    """Positive ordinates of critical zeros, ascending, with a lazy
    zeta'(rho) cache (insert-or-get; values are deterministic)."""

    ordinates: np.ndarray
    source_path: str
    count: int
    _zprime: dict = field(default_factory=dict, repr=False)

    def zeta_prime_at(self, t: float) -> complex:
        got = self._zprime.get(t)
        if got is None:
            got = zeta_prime_line(complex(0.5, t))
            self._zprime[t] = got
        return got


def load_zeros(path) -> ZeroData:
    """Parse a zeros file: one ascending positive decimal per line,
    '#' comments and blank lines allowed.  Each ordinate is re-verified
    as an approximate zero (|zeta(1/2+it)| < 1e-3)."""
    vals: list[float] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                t = float(line)
            except ValueError:
                raise DataFormatError(
                    f"{path}: line {lineno}: unparseable ordinate {line!r}")
            if t <= 0.0:
                raise DataFormatError(
                    f"{path}: line {lineno}: ordinate must be positive")
            if vals and t <= vals[-1]:
                raise DataFormatError(
                    f"{path}: line {lineno}: ordinates must be ascending")
            vals.append(t)
    for t in vals:
        if abs(zeta_line(complex(0.5, t))) >= 1e-3:
            raise DataFormatError(
                f"{path}: ordinate {t} fails the zero check "
                f"(|zeta(1/2+it)| >= 1e-3)")
    return ZeroData(ordinates=np.asarray(vals), source_path=str(path),
                    count=len(vals))


def perron_zero_sum(n_val: float, zeros: ZeroData, m_zeros: int) -> float:
    """Partial sum over the first m_zeros critical zeros (plus
    conjugates) of the contour-shift formula for dLbar_1(N) log N:

        sum_rho N^{rho-1} / (zeta'(rho) (1-rho)^2) [log N + 2/(1-rho)]

    Conjugate pairing makes each pair contribute twice the real part.
    Assumes the zeros used are simple (guarded by a |zeta'| floor).
    """
    if n_val < 2.0:
        raise InvalidArgumentError("perron_zero_sum: N must be >= 2")
    if not 0 <= m_zeros <= zeros.count:
        raise InvalidArgumentError(
            f"perron_zero_sum: m_zeros={m_zeros} not in 0..{zeros.count}")
    logn = math.log(n_val)
    total = 0.0
    for t in zeros.ordinates[:m_zeros]:
        rho = complex(0.5, float(t))
        zp = zeros.zeta_prime_at(float(t))
        if abs(zp) < 1e-6:
            raise NumericalError(
                f"perron_zero_sum: |zeta'(rho)| = {abs(zp):.2e} at t={t} "
                "is below the simple-zero floor")
        one_m = 1.0 - rho
        term = (cmath.exp((rho - 1.0) * logn) / (zp * one_m * one_m)
                * (logn + 2.0 / one_m))
        total += 2.0 * term.real
    return total
