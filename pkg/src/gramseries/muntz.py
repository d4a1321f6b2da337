"""Muntz-type remainder terms and their dilation series.

Core objects:

    R1(x) = log x + gamma - H(x) - ({x} - 1/2)/x
    R2(x) = (1/x)((log 2pi)/2 + 1 + (log x)/2) + (2-gamma) log x
            - (log^2 x)/2 + 2 gamma + gamma_1 - 3
            + (1/x) sum_{l <= x} [(1 + x/l) log(x/l) + 2(1 - x/l)]
    V(x)  = integral of R1 over (x, infinity)  (closed form below)
    S_q(x) = sum_{k>=1} R_q(k x)

R1 and R2 decay like x^-2 and x^-4 with Bernoulli-polynomial leading
terms, so S_q converges absolutely.  Series evaluations report a value
plus a rigorous tail_bound.

Evaluation strategy per branch (crossovers chosen so every branch stays
near machine accuracy *in absolute terms*, which the tail-constant fits
rely on):

  * x <= 1: closed forms.
  * moderate x: the defining formulas with cached cumulative tables.
  * large x: the defining formulas rearranged so all O(log x)-sized terms
    cancel symbolically, leaving only O(1/x)-sized quantities (log(x/b)
    is computed as log1p({x}/b), the sum families enter through their
    cancellation-free Euler-Maclaurin tails).
  * very large x: the Bernoulli tails themselves.

For series at a *rational* point x = p/q the truncation tail is summed
analytically: {k p/q} depends only on k mod q, so the Bernoulli parts of
the tail collapse into at most q Hurwitz-zeta values per degree.  That
turns tails that would cost ~c/(x^2 tol) terms into a few hundred terms
plus O(q) special-function calls, and is what keeps the quadratic-form
machinery downstream affordable.  Floats that are not exactly a small
fraction get the crude (worst-case) tail bound instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import zeta as hurwitz_zeta

from . import constants as cn
from .accum import Kahan, fsum_array
from .errors import InvalidArgumentError, ResourceLimitError
from .quadrature import integrate

# Regime thresholds.  ASYM_*: switch to cancellation-free rearrangements;
# TAIL_*: switch to the pure Bernoulli tails (placed where the tail's own
# truncation error is far below double-precision noise of the alternative).
ASYM_START = 100.0
R1_TAIL_START = 1.0e6
R2_TAIL_START = 5.0e3

# Fitted remainder constants (sup over a dense grid, safety factor >= 1.5;
# see tests/test_muntz.py which re-derives them on a coarser grid):
#   |R1(y)|                                   <= C2_R1 / y^2   (y >= 100)
#   |R1(y) - B2({y})/(2y^2) - B3({y})/(3y^3)| <= C4_R1 / y^4   (y >= 100)
#   |R2(y)|                                   <= C4_R2 / y^4   (y >= 100)
#   |R2(y) + B4({y})/(24 y^4)|                <= C5_R2 / y^5   (y >= 100)
#   |V(y)|                                    <= CV2 / y^2     (y >= 100)
# (V(y) = -B3({y})/(6 y^2) + O(y^-3), hence the y^-2 envelope.)
C2_R1 = 0.13
C4_R1 = 0.013
C4_R2 = 0.0021
C5_R2 = 0.011
CV2 = 0.013

K_CAP = 100_000_000  # hard cap on summed series terms
HURWITZ_Q_CAP = 65_536  # largest denominator handled by the analytic tail
_CHUNK = 1 << 22


@dataclass(frozen=True)
class SeriesEval:
    """A series value with a rigorous bound on the truncation error."""
    value: float
    tail_bound: float
    n_terms: int


# ---------------------------------------------------------------------------
# R1

def _r1_vec(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    out = np.empty_like(y)
    if np.any(y <= 0.0):
        raise InvalidArgumentError("r1: argument must be positive")

    m = y <= 1.0
    if np.any(m):
        t = y[m]
        out[m] = 0.5 / t + np.log(t) + cn.GAMMA - 1.0

    m = (y > 1.0) & (y < ASYM_START)
    if np.any(m):
        t = y[m]
        b = np.floor(t)
        f = t - b
        h = cn.harmonic_table()[b.astype(np.int64)]
        out[m] = np.log(t) + cn.GAMMA - h - (f - 0.5) / t

    m = (y >= ASYM_START) & (y < R1_TAIL_START)
    if np.any(m):
        t = y[m]
        b = np.floor(t)
        f = t - b
        ib = 1.0 / b
        ib2 = ib * ib
        # log t + gamma - H(b), all big parts cancelled symbolically
        htail = 0.5 * ib - ib2 / 12.0 + ib2 * ib2 / 120.0 - ib2 * ib2 * ib2 / 252.0
        out[m] = np.log1p(f * ib) - htail - (f - 0.5) / t

    m = y >= R1_TAIL_START
    if np.any(m):
        t = y[m]
        f = t - np.floor(t)
        out[m] = (cn.bernoulli_poly(2, f) / (2.0 * t * t)
                  + cn.bernoulli_poly(3, f) / (3.0 * t ** 3))
    return out


def r1(x: float) -> float:
    """R1(x); reduces to 1/(2x) + log x + gamma - 1 on (0, 1]."""
    return float(_r1_vec(np.array([x]))[0])


# ---------------------------------------------------------------------------
# R2

def _r2_vec(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    out = np.empty_like(y)
    if np.any(y <= 0.0):
        raise InvalidArgumentError("r2: argument must be positive")
    c = cn.constants()

    m = y <= 1.0
    if np.any(m):
        t = y[m]
        lt = np.log(t)
        out[m] = (c.C2 + 0.5 * lt) / t + (2.0 - c.gamma) * lt - 0.5 * lt * lt + c.C1

    m = (y > 1.0) & (y < ASYM_START)
    if np.any(m):
        t = y[m]
        b = np.floor(t)
        f = t - b
        bi = b.astype(np.int64)
        lt = np.log(t)
        h = cn.harmonic_table()[bi]
        ls = cn.logsum_table()[bi]
        lk = cn.logoverk_table()[bi]
        out[m] = ((c.C2 + 0.5 * lt) / t + (2.0 - c.gamma) * lt - 0.5 * lt * lt + c.C1
                  + (b / t) * lt + h * (lt - 2.0) - ls / t - lk + 2.0 * b / t)

    m = (y >= ASYM_START) & (y < R2_TAIL_START)
    if np.any(m):
        t = y[m]
        b = np.floor(t)
        f = t - b
        lb = np.log(b)
        ib = 1.0 / b
        ib2 = ib * ib
        htail = 0.5 * ib - ib2 / 12.0 + ib2 * ib2 / 120.0 - ib2 * ib2 * ib2 / 252.0
        stail = ib / 12.0 - ib * ib2 / 360.0 + ib * ib2 * ib2 / 1260.0
        wtail = (0.5 * lb * ib + (1.0 - lb) * ib2 / 12.0
                 + (6.0 * lb - 11.0) * ib2 * ib2 / 720.0)
        ell = np.log1p(f * ib)  # log(t/b), cancellation-free
        # exact rearrangement of the defining formula: every term below is
        # O(log b / b), so double precision holds on to ~1e-20 absolutely
        out[m] = (1.0 / t - 3.0 * f / t - 0.5 * ell * ell
                  + ell * (2.0 + (b + 0.5) / t + htail)
                  + htail * (lb - 2.0) - stail / t - wtail)

    m = y >= R2_TAIL_START
    if np.any(m):
        t = y[m]
        f = t - np.floor(t)
        out[m] = -cn.bernoulli_poly(4, f) / (24.0 * t ** 4)
    return out


def r2(x: float) -> float:
    """R2(x); R2(1) = C1 + C2 ~ 0.000554."""
    return float(_r2_vec(np.array([x]))[0])


_R_VEC = {1: _r1_vec, 2: _r2_vec}


# ---------------------------------------------------------------------------
# V(x) = integral of R1 over (x, infinity)

def _v_vec(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    out = np.empty_like(y)
    if np.any(y <= 0.0):
        raise InvalidArgumentError("v: argument must be positive")

    m = y < ASYM_START
    if np.any(m):
        t = y[m]
        b = np.floor(t)
        f = t - b
        bi = b.astype(np.int64)
        h = cn.harmonic_table()[bi]
        ls = cn.logsum_table()[bi]
        lt = np.log(t)
        out[m] = (t * (h - lt - cn.GAMMA + 2.0) - 0.5 * lt + ls
                  - b * (1.0 + lt) - 0.5 * cn.LOG_2PI - 0.5)

    m = y >= ASYM_START
    if np.any(m):
        t = y[m]
        b = np.floor(t)
        f = t - b
        ib = 1.0 / b
        ib2 = ib * ib
        htail = 0.5 * ib - ib2 / 12.0 + ib2 * ib2 / 120.0 - ib2 * ib2 * ib2 / 252.0
        stail = ib / 12.0 - ib * ib2 / 360.0 + ib * ib2 * ib2 / 1260.0
        ell = np.log1p(f * ib)
        # same symbolic cancellation as the R2 mid branch
        out[m] = t * htail - (t + b + 0.5) * ell + 2.0 * f + stail - 0.5
    return out


def v(x: float) -> float:
    """V(x) = x(H(x) - log x - gamma + 2) - (log x)/2 + LS(x)
    - floor(x)(1 + log x) - (log 2pi)/2 - 1/2;  V(1) = 3/2 - gamma - (log 2pi)/2."""
    return float(_v_vec(np.array([x]))[0])


# ---------------------------------------------------------------------------
# series heads

def _series_head(q: int, x: float, n_terms: int) -> float:
    """sum_{k=1}^{n_terms} R_q(k x), chunked and compensated."""
    rv = _R_VEC[q]
    acc = Kahan()
    for lo in range(1, n_terms + 1, _CHUNK):
        hi = min(n_terms, lo + _CHUNK - 1)
        k = np.arange(lo, hi + 1, dtype=np.float64)
        acc.add(fsum_array(rv(k * x)))
    return acc.total


def _crude_terms(q: int, x: float, tol: float) -> int:
    """Terms needed so the worst-case Bernoulli majorant tail is <= tol."""
    if q == 1:
        k = C2_R1 / (x * x * tol)
    else:
        k = (C4_R2 / (3.0 * x ** 4 * tol)) ** (1.0 / 3.0)
    return max(int(math.ceil(ASYM_START / x)), int(math.ceil(k)), 8)


def _crude_bound(q: int, x: float, n: int) -> float:
    if q == 1:
        return C2_R1 / (x * x * n)
    return C4_R2 / (3.0 * x ** 4 * n ** 3)


def s_partial(q: int, x: float, n_terms: int) -> SeriesEval:
    """Partial series sum_{k<=n_terms} R_q(kx) with its worst-case tail bound.

    Sums exactly n_terms terms.  The bound is crude (worst case); when the
    cut falls before the asymptotic regime (n_terms * x < 100) no finite
    envelope applies and the bound is reported as inf.
    """
    if x <= 0.0:
        raise InvalidArgumentError("s_partial: x must be positive")
    if n_terms < 1:
        raise InvalidArgumentError("s_partial: n_terms must be >= 1")
    n = int(n_terms)
    if n > K_CAP:
        raise ResourceLimitError(f"series term count {n} exceeds cap {K_CAP}")
    bound = _crude_bound(q, x, n) if n * x >= ASYM_START else math.inf
    return SeriesEval(_series_head(q, x, n), bound, n)


def _analytic_tail(q: int, p: int, qden: int, k0: int) -> float:
    """sum_{k > k0} of the Bernoulli leading terms of R_q(k p/qden), exactly.

    {k p/qden} depends only on k mod qden, so each degree-j Bernoulli term
    collapses to qden Hurwitz-zeta values:
        sum_{k>k0} B_j({k p/q}) k^-j
            = q^-j sum_t B_j(((t p) mod q)/q) zeta_H(j, k_t/q).
    """
    t = np.arange(qden, dtype=np.int64)
    k_t = k0 + 1 + ((t - (k0 + 1)) % qden)  # first k > k0 with k = t mod qden
    s_t = (t * p) % qden
    frac = s_t.astype(np.float64) / qden
    a = k_t.astype(np.float64) / qden
    if q == 1:
        # B2/(2 y^2) + B3/(3 y^3) with y = k p/qden
        t2 = fsum_array(cn.bernoulli_poly(2, frac) * hurwitz_zeta(2, a))
        t3 = fsum_array(cn.bernoulli_poly(3, frac) * hurwitz_zeta(3, a))
        return t2 / (2.0 * p ** 2) + t3 / (3.0 * p ** 3)
    t4 = fsum_array(cn.bernoulli_poly(4, frac) * hurwitz_zeta(4, a))
    return -t4 / (24.0 * p ** 4)


def _s_frac(q: int, p: int, qden: int, tol: float) -> SeriesEval:
    if p <= 0 or qden <= 0:
        raise InvalidArgumentError("series: p/q must be a positive rational")
    g = math.gcd(p, qden)
    p, qden = p // g, qden // g
    x = p / qden
    # terms so that (a) all tail arguments sit in the asymptotic regime and
    # (b) the post-correction remainder C/(k x)^(2q+2) summed is <= tol/2
    if q == 1:
        k_rem = (2.0 * C4_R1 / (3.0 * tol)) ** (1.0 / 3.0) * (qden / p) ** (4.0 / 3.0)
        n = max(int(math.ceil(ASYM_START * qden / p)), int(math.ceil(k_rem)), 8)
        rem = C4_R1 / (3.0 * x ** 4 * n ** 3)
    else:
        k_rem = (2.0 * C5_R2 / (4.0 * tol)) ** 0.25 * (qden / p) ** 1.25
        n = max(int(math.ceil(ASYM_START * qden / p)), int(math.ceil(k_rem)), 8)
        rem = C5_R2 / (4.0 * x ** 5 * n ** 4)
    if n > K_CAP:
        raise ResourceLimitError(
            f"series at {p}/{qden} needs {n} terms for tol={tol} (cap {K_CAP})")
    value = _series_head(q, x, n) + _analytic_tail(q, p, qden, n)
    # implementation error of the head in the Bernoulli-tail regime is below
    # C/(TAIL_START)^(2q+1)/x per the same fitted constants; fold in a pad
    return SeriesEval(value, rem + 1e-16, n)


def s1_frac(p: int, qden: int, tol: float = 1e-10) -> SeriesEval:
    """S1 at the exact rational p/qden with analytic residue-class tail."""
    return _s_frac(1, p, qden, tol)


def s2_frac(p: int, qden: int, tol: float = 1e-10) -> SeriesEval:
    """S2 at the exact rational p/qden with analytic residue-class tail."""
    return _s_frac(2, p, qden, tol)


def _as_small_fraction(x: float, max_den: int = 4096):
    fr = Fraction(x).limit_denominator(max_den)
    if float(fr) == x and fr.denominator <= max_den:
        return fr.numerator, fr.denominator
    return None


def _s_eval(q: int, x: float, tol: float) -> SeriesEval:
    if x <= 0.0:
        raise InvalidArgumentError("series: x must be positive")
    if not (tol > 0.0):
        raise InvalidArgumentError("series: tol must be positive")
    pq = _as_small_fraction(x)
    if pq is not None and pq[1] <= HURWITZ_Q_CAP:
        return _s_frac(q, pq[0], pq[1], tol)
    n = _crude_terms(q, x, tol)
    if n > K_CAP:
        raise ResourceLimitError(
            f"series at x={x} needs {n} terms for tol={tol} (cap {K_CAP}); "
            "use a rational argument or a coarser tolerance")
    return SeriesEval(_series_head(q, x, n), _crude_bound(q, x, n), n)


def s1(x: float, tol: float = 1e-8) -> SeriesEval:
    """S1(x) = sum_k R1(kx) with tail_bound <= tol.

    S1(1) = (log 2pi - gamma - 1)/2 ~ 0.130331.
    """
    return _s_eval(1, x, tol)


def s2(x: float, tol: float = 1e-8) -> SeriesEval:
    """S2(x) = sum_k R2(kx) with tail_bound <= tol; S2(1) ~ 0.000643."""
    return _s_eval(2, x, tol)


# ---------------------------------------------------------------------------
# reciprocity

@dataclass(frozen=True)
class ReciprocityCheck:
    residual: float
    tail_bound: float


def reciprocity_residual(q: int, r: float, tol: float = 1e-8,
                         detail: bool = False):
    """Residual of the reciprocity law relating S_q(1/r) to S_q(r).

        S1(1/r) = r S1(r) + K (1-r) + (1+r)(log r)/2
        S2(1/r) = r S2(r) + K2 (1-r) + K1 (1+r) log r + (1-r)(log^2 r)/4

    The evaluation tolerance adapts so neither series exceeds a work cap.
    Returns the residual; with detail=True returns a ReciprocityCheck that
    also carries the combined rigorous tail bound of the two series.
    """
    if q not in (1, 2):
        raise InvalidArgumentError("reciprocity_residual: q must be 1 or 2")
    if r <= 0.0:
        raise InvalidArgumentError("reciprocity_residual: r must be positive")
    c = cn.constants()

    def eval_side(x: float) -> SeriesEval:
        t = tol
        if _as_small_fraction(x) is None:
            # crude-tail path: relax tol until the term count fits a work cap
            n = _crude_terms(q, x, t)
            while n > 2_000_000:
                t *= 4.0
                n = _crude_terms(q, x, t)
        return _s_eval(q, x, t)

    left = eval_side(1.0 / r)
    right = eval_side(r)
    lr = math.log(r)
    if q == 1:
        poly = c.K * (1.0 - r) + 0.5 * (1.0 + r) * lr
    else:
        poly = (c.K2 * (1.0 - r) + c.K1 * (1.0 + r) * lr
                + 0.25 * (1.0 - r) * lr * lr)
    residual = left.value - (r * right.value + poly)
    check = ReciprocityCheck(residual, left.tail_bound + r * right.tail_bound + 1e-15)
    return check if detail else check.residual


# ---------------------------------------------------------------------------
# the sawtooth sum phi1 and the integral representations

def phi1_partial(x: float, k_max: int) -> float:
    """phi1 partial sum: sum_{k<=k_max} ({kx} - 1/2)/k."""
    if k_max < 1:
        raise InvalidArgumentError("phi1_partial: k_max must be >= 1")
    k = np.arange(1, k_max + 1, dtype=np.float64)
    kx = k * x
    return fsum_array(((kx - np.floor(kx)) - 0.5) / k)


def _divisor_counts(m_max: int) -> np.ndarray:
    d = np.zeros(m_max + 1, dtype=np.int64)
    for a in range(1, m_max + 1):
        d[a::a] += 1
    return d


def phi1_fourier(x: float, m_max: int) -> float:
    """Fourier form of phi1: -sum_{m<=m_max} d(m) sin(2 pi m x)/(pi m),
    d(m) the divisor count.  Converges only in the L2/Cesaro sense; partial
    sums oscillate near the jumps of phi1."""
    if m_max < 1:
        raise InvalidArgumentError("phi1_fourier: m_max must be >= 1")
    m = np.arange(1, m_max + 1, dtype=np.float64)
    d = _divisor_counts(m_max)[1:].astype(np.float64)
    return -fsum_array(d * np.sin(2.0 * math.pi * m * x) / (math.pi * m))


_B3_MAX = math.sqrt(3.0) / 36.0  # sup |B3| on [0,1]
_B6_MAX = 0.02393  # sup |B6| on [0,1], rounded up


def _b3sum(ts: np.ndarray, k_max: int) -> np.ndarray:
    """sum_{k<=k_max} B3({k t})/(6 k^3), vectorised over ts."""
    out = np.zeros_like(ts)
    for lo in range(1, k_max + 1, 4096):
        hi = min(k_max, lo + 4095)
        k = np.arange(lo, hi + 1, dtype=np.float64)
        kt = k[:, None] * ts[None, :]
        out += cn.bernoulli_poly(3, kt - np.floor(kt)).T @ (1.0 / (6.0 * k ** 3))
    return out


def _i3(a: np.ndarray) -> np.ndarray:
    """integral_a^inf B3({u}) u^-4 du by parts up the Bernoulli ladder;
    remainder is below B6MAX/(6 a^6) (needs a >= ~10 to be worth it)."""
    f = a - np.floor(a)
    return -(cn.bernoulli_poly(4, f) / (4.0 * a ** 4)
             + cn.bernoulli_poly(5, f) / (5.0 * a ** 5)
             + cn.bernoulli_poly(6, f) / (6.0 * a ** 6))


def s1_via_phi_integral(r: float, quad_tol: float = 1e-6) -> float:
    """S1(r) = - integral_r^inf phi1(t) dt/t^2, via the sawtooth sum phi1.

    Integrating each sawtooth term by parts twice (continuous antiderivatives
    B2({kt})/(2k), then B3({kt})/(6k^2)) turns the dense jump set into

        S1(r) = A_r/r^2 + 2 G(r)/r^3 - 6 integral_r^inf G(t)/t^4 dt,
        A_r = sum_k B2({kr})/(2k^2),   G(t) = sum_k B3({kt})/(6k^3).

    The integral is split per term: the few k with kr < 10 are integrated by
    panelled quadrature up to T (their kinks are sparse and get seeded) with
    an analytic continuation past T, and every k with kr >= 10 is integrated
    entirely by parts up the Bernoulli ladder.  All truncations carry
    rigorous bounds.
    """
    if r <= 0.0:
        raise InvalidArgumentError("s1_via_phi_integral: r must be positive")
    if r < 0.1:
        raise ResourceLimitError(
            "phi-integral route is intended for r >= 0.1; apply reciprocity first")
    # point terms A_r and G(r), crude truncations
    k_max_a = int(math.ceil(1.0 / (3.0 * quad_tol * r * r)))
    if k_max_a > K_CAP:
        raise ResourceLimitError(
            f"phi-integral route needs k_max={k_max_a} at r={r}, tol={quad_tol}")
    acc = Kahan()
    for lo in range(1, k_max_a + 1, _CHUNK):
        hi = min(k_max_a, lo + _CHUNK - 1)
        k = np.arange(lo, hi + 1, dtype=np.float64)
        kr = k * r
        acc.add(fsum_array(cn.bernoulli_poly(2, kr - np.floor(kr)) / (2.0 * k * k)))
    a_r = acc.total
    k_max_g = int(math.ceil(math.sqrt(0.065 / (quad_tol * r ** 3))))
    g_r = float(_b3sum(np.array([r]), k_max_g)[0])

    # split point for the integral: k <= ks by quadrature on [r, T]
    t_end = max(r, 10.0)
    ks = int(math.ceil(10.0 / r)) if t_end > r else 1
    quad_val = 0.0
    qerr = 0.0
    if t_end > r:
        cuts = np.concatenate([
            np.arange(math.ceil(k * r), k * t_end + 1.0) / k
            for k in range(1, ks + 1)])

        def f(ts):
            return _b3sum(ts, ks) / ts ** 4

        quad_val, qerr = integrate(f, r, t_end, quad_tol / 48.0,
                                   breakpoints=cuts, order=8)

    # analytic pieces: k <= ks continue from kT; k > ks integrate from kr
    k_lo = np.arange(1, ks + 1, dtype=np.float64)
    tail_small = fsum_array(_i3(k_lo * t_end)) / 6.0
    k_parts_end = int(math.ceil((0.012 / (quad_tol * r ** 4)) ** (1.0 / 3.0)))
    tail_large = 0.0
    if k_parts_end > ks:
        k_hi = np.arange(ks + 1, k_parts_end + 1, dtype=np.float64)
        tail_large = fsum_array(_i3(k_hi * r)) / 6.0

    integ = quad_val + tail_small + tail_large
    return a_r / r ** 2 + 2.0 * g_r / r ** 3 - 6.0 * integ


def _corr_mean(p: int, q: int) -> float:
    """integral_0^1 ({p u} - 1/2)({q u} - 1/2) du, exactly (piecewise GL2)."""
    cuts = np.unique(np.concatenate([np.arange(p + 1) / p, np.arange(q + 1) / q]))
    lo, hi = cuts[:-1], cuts[1:]
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x1 = mid - half / math.sqrt(3.0)
    x2 = mid + half / math.sqrt(3.0)

    def f(u):
        pu = p * u
        qu = q * u
        return (pu - np.floor(pu) - 0.5) * (qu - np.floor(qu) - 0.5)

    return float(np.sum(half * (f(x1) + f(x2))))


def s1_via_floor_integral(r: float, quad_tol: float = 1e-6) -> float:
    """S1(r) = -(1/r) integral_1^inf ({x r} - 1/2) floor(x) dx/x^2.

    Quadrature splits at every jump of {xr} and floor(x).  The tail beyond T
    is corrected analytically: the sawtooth part integrates to -B2({Tr})/(2rT)
    plus O(T^-2), and the resonant product ({xr}-1/2)({x}-1/2) has exact mean
    rho = integral ({pu}-1/2)({qu}-1/2) du for rational r = p/q, contributing
    -rho/T.  (For r = 1 the mean is 1/12.)
    """
    if r <= 0.0:
        raise InvalidArgumentError("s1_via_floor_integral: r must be positive")
    pq = _as_small_fraction(r)
    if pq is None:
        rho = 0.0
        qden = 64  # only enters the residual bound heuristically
    else:
        rho = _corr_mean(pq[0], pq[1])
        qden = pq[1]
    resid_const = 0.1 / r + 0.6 * qden
    t_end = math.sqrt(2.0 * resid_const / quad_tol)
    if pq is not None:
        t_end = pq[1] * math.ceil(t_end / pq[1])  # integer multiple of q: {Tr} = 0
    else:
        t_end = math.ceil(t_end)
    n_break = (1.0 + r) * t_end
    if n_break > 4e6:
        raise ResourceLimitError(
            f"floor-integral route needs ~{int(n_break)} panels at r={r}")

    cuts = np.unique(np.concatenate([
        np.arange(1.0, t_end + 1.0),                      # floor(x) jumps
        np.arange(math.ceil(r), t_end * r + 1.0) / r,     # {xr} jumps
    ]))

    def f(x):
        xr = x * r
        return (xr - np.floor(xr) - 0.5) * np.floor(x) / (x * x)

    integ, _ = integrate(f, 1.0, float(t_end), quad_tol * r / 4.0,
                         breakpoints=cuts, order=6)
    fr_t = t_end * r - math.floor(t_end * r)
    tail = (-cn.bernoulli_poly(2, fr_t) / (2.0 * r * t_end)) - rho / t_end
    return -(integ + tail) / r


def r1_via_integral(x: float, quad_tol: float = 1e-8) -> float:
    """R1(x) = - integral_x^inf ({t} - 1/2) dt/t^2 by panelled quadrature
    with the analytic tail -1/(12 T^2) + O(T^-3) at integer T."""
    if x <= 0.0:
        raise InvalidArgumentError("r1_via_integral: x must be positive")
    t_end = math.ceil(max(x + 2.0, (0.06 / quad_tol) ** (1.0 / 3.0)))
    cuts = np.arange(math.floor(x) + 1.0, t_end)

    def f(t):
        return (t - np.floor(t) - 0.5) / (t * t)

    integ, _ = integrate(f, x, float(t_end), quad_tol / 4.0,
                         breakpoints=cuts, order=6)
    return -(integ - 1.0 / (12.0 * t_end ** 2))


def fracpart_log_integral(quad_tol: float = 1e-6) -> float:
    """integral_1^inf ({x} - 1/2) dx/x  ( = (log 2pi)/2 - 1 )."""
    t_end = math.ceil(math.sqrt(0.03 / quad_tol))
    cuts = np.arange(2.0, t_end)

    def f(t):
        return (t - np.floor(t) - 0.5) / t

    integ, _ = integrate(f, 1.0, float(t_end), quad_tol / 4.0,
                         breakpoints=cuts, order=6)
    return integ - 1.0 / (12.0 * t_end)


# ---------------------------------------------------------------------------
# V-series identities

def _v_series(r: float, tol: float) -> SeriesEval:
    if r <= 0.0:
        raise InvalidArgumentError("v_series_integral: r must be positive")
    n = max(int(math.ceil(ASYM_START / r)),
            int(math.ceil(math.sqrt(CV2 / (2.0 * r * r * tol)))), 8)
    if n > K_CAP:
        raise ResourceLimitError(f"V-series needs {n} terms for tol={tol}")
    acc = Kahan()
    for lo in range(1, n + 1, _CHUNK):
        hi = min(n, lo + _CHUNK - 1)
        k = np.arange(lo, hi + 1, dtype=np.float64)
        acc.add(fsum_array(_v_vec(k * r) / k))
    return SeriesEval(acc.total, CV2 / (2.0 * r * r * n * n), n)


def v_series_integral(r: float, tol: float = 1e-6) -> float:
    """integral_r^inf S1(t) dt = sum_n V(n r)/n, truncation below tol."""
    return _v_series(r, tol).value


def _s1_log(r: float, tol: float) -> SeriesEval:
    if r <= 0.0:
        raise InvalidArgumentError("s1_log_integral: r must be positive")
    n = max(int(math.ceil(ASYM_START / r)),
            int(math.ceil((CV2 / (3.0 * r ** 3 * tol)) ** (1.0 / 3.0))), 8)
    if n > K_CAP:
        raise ResourceLimitError(f"V-series needs {n} terms for tol={tol}")
    acc = Kahan()
    for lo in range(1, n + 1, _CHUNK):
        hi = min(n, lo + _CHUNK - 1)
        k = np.arange(lo, hi + 1, dtype=np.float64)
        acc.add(fsum_array(_v_vec(k * r) / (k * r)))
    s2r = _s_eval(2, r, tol / 2.0)
    return SeriesEval(s2r.value + acc.total,
                      s2r.tail_bound + CV2 / (3.0 * r ** 3 * n ** 3), n)


def s1_log_integral(r: float, tol: float = 1e-6) -> float:
    """integral_r^inf S1(t) dt/t = S2(r) + sum_n V(n r)/(n r)."""
    return _s1_log(r, tol).value


def s2_via_s1_integral(r: float, quad_tol: float = 1e-5) -> float:
    """S2(r) = integral_r^inf S1(t) (1/t - 1/r) dt.

    One more integration by parts turns the piecewise-rough S1 into the C^1
    running integral W(t) = integral_r^t S1 = sum_k (V(kr) - V(kt))/k, which
    needs only ~sqrt(CV2/tol) terms per node because V decays like y^-2:

        S2(r) = W(T)(1/T - 1/r) + integral_r^T W(t)/t^2 dt + tail(T),

    where tail(T) reuses the V-series identities for integral_T^inf S1 and
    integral_T^inf S1/t (the S2(T) piece of the latter is dropped, bounded
    by C4_R2 zeta(4)/T^4).
    """
    if r <= 0.0:
        raise InvalidArgumentError("s2_via_s1_integral: r must be positive")
    t_end = max(4.0 * r, 12.0)
    n_w = int(math.ceil(math.sqrt(8.0 * CV2 / (r ** 3 * quad_tol))))
    k_w = np.arange(1, n_w + 1, dtype=np.float64)
    w_at_r = fsum_array(_v_vec(k_w * r) / k_w)

    def w_of(ts: np.ndarray) -> np.ndarray:
        acc = np.zeros_like(ts)
        for lo in range(1, n_w + 1, 2048):
            hi = min(n_w, lo + 2047)
            k = np.arange(lo, hi + 1, dtype=np.float64)
            acc += (_v_vec((k[:, None] * ts[None, :]).ravel())
                    .reshape(hi - lo + 1, -1) / k[:, None]).sum(axis=0)
        return w_at_r - acc

    integ, qerr = integrate(lambda ts: w_of(ts) / (ts * ts),
                            r, t_end, quad_tol / 4.0, order=10)
    boundary = float(w_of(np.array([t_end]))[0]) * (1.0 / t_end - 1.0 / r)

    head_int = _v_series(t_end, quad_tol / 8.0)              # int_T S1
    n = max(int(math.ceil(ASYM_START / t_end)),
            int(math.ceil((CV2 / (3.0 * t_end ** 3 * quad_tol / 8.0)) ** (1.0 / 3.0))), 8)
    k = np.arange(1, n + 1, dtype=np.float64)
    log_part = fsum_array(_v_vec(k * t_end) / (k * t_end))   # int_T S1/t - S2(T)

    return boundary + integ + log_part - head_int.value / r
