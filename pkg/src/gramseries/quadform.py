"""Quadratic forms in the Nyman-Beurling Gram matrix, two ways.

The squared approximation distance behind the whole construction splits as

    d_q^2(N) = q - 2 sum_n a_n F_n^(q) + Q_N^(q),
    Q_N^(q)  = sum_{m,n <= N} a_m a_n G^(q)_{m,n},

and Q admits two independent evaluation routes: the direct bilinear form
a^T G a over the Gram matrix, and an algebraic rearrangement into the
Mertens/Landau partial sums of `arith`, a closed-form sum of R_q(1/m)
contributions, and the inversion-error term

    E^(q)(N) = sum_{m<=N} (a_m/m) [ sum_{n<=N} a_n S_q(n/m) - R_q(1/m) ].

The route equality is an algebraic identity, so the agreement of the two
numbers is an end-to-end check on every series evaluator involved.

The performance core is a divisor convolution: with
c_j = sum_{n | j, n <= N} a_n,

    sum_{n<=N} a_n S_q(n/m) = sum_{n<=N} a_n sum_k R_q(k n/m)
                            = sum_{j} c_j R_q(j/m),

one sieve pass builds the weights c_j, one vectorized pass evaluates the
head j <= J, and each n gets an exact Bernoulli/Hurwitz tail for its terms
beyond J.  For q = 1 the tail keeps degrees 2..5 of the fractional-part
expansion R_1(y) ~ sum_j B_j({y})/(j y^j), so the truncation J only has to
beat a y^-6 remainder; for q = 2 the built-in degree-4 tail with its y^-5
remainder is already cheap.

For the wide-N distance sweeps a dense batched Gram builder replaces the
entry-at-a-time route: the first-kernel matrix comes from exact Vasyunin
cotangent sums evaluated per denominator, the second-kernel matrix from
short direct R_2 series bucketed by term count.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.special import zeta as hurwitz_zeta

from . import constants as cn
from . import gram
from . import identities
from .accum import fsum_array
from .arith import CoefficientVector, coefficients, l_term, m_term, solve_abc
from .errors import InvalidArgumentError, ResourceLimitError
from .muntz import (
    ASYM_START,
    C4_R2,
    C5_R2,
    HURWITZ_Q_CAP,
    R1_TAIL_START,
    R2_TAIL_START,
    _analytic_tail,
    _r1_vec,
    _r2_vec,
    r1,
    r2,
    s2_frac,
)

# remainder of R_1 after the degree-2..5 Bernoulli terms: sup of
# y^6 |R_1(y) - asymptote| measures 0.00405 on y in [100, 200] (larger y
# drowns in double rounding), consistent with |B_6|_max/6 = 0.00397
C6_R1 = 0.005

_J_CAP = 40_000_000  # hard cap on convolved head length
_CHUNK = 1 << 22
_DENSE_CAP = 5_000  # dense Gram builder: (n+1)^2 doubles, 200 MB at the cap

_R_FUN = {1: _r1_vec, 2: _r2_vec}


# ---------------------------------------------------------------------------
# F-terms and the mixed sum

def f_term(n: int, q: int) -> float:
    """F_n^(q), the cross term <e_n, chi> of the distance expansion."""
    if q not in (1, 2):
        raise InvalidArgumentError(f"f_term: q must be 1 or 2, got {q}")
    if int(n) != n or n < 1:
        raise InvalidArgumentError("f_term: n must be a positive integer")
    c = cn.constants()
    ln = math.log(n)
    if q == 1:
        return (c.gamma - 1.0 - ln) / n
    return (-0.5 * ln * ln + (c.gamma - 2.0) * ln + c.C1) / n


def _f_vec(q: int, n_max: int) -> np.ndarray:
    """F_n^(q) for n = 0..n_max (index 0 unused, set to 0)."""
    c = cn.constants()
    n = np.arange(1, n_max + 1, dtype=np.float64)
    ln = np.log(n)
    if q == 1:
        vals = (c.gamma - 1.0 - ln) / n
    else:
        vals = (-0.5 * ln * ln + (c.gamma - 2.0) * ln + c.C1) / n
    return np.concatenate([np.zeros(1), vals])


def mixed_sum(coeffs: CoefficientVector, q: int, n_sum: int) -> float:
    """sum_{n <= n_sum} a_n F_n^(q)."""
    if q not in (1, 2):
        raise InvalidArgumentError(f"mixed_sum: q must be 1 or 2, got {q}")
    if int(n_sum) != n_sum or not 1 <= n_sum <= coeffs.n_cap:
        raise InvalidArgumentError(
            f"mixed_sum: need 1 <= n_sum <= {coeffs.n_cap}, got {n_sum}")
    n_sum = int(n_sum)
    return fsum_array(coeffs.values[1:n_sum + 1] * _f_vec(q, n_sum)[1:])


# ---------------------------------------------------------------------------
# convolved series sums and the inversion error

def _divisor_weights(values: np.ndarray, n_cap: int, j_max: int) -> np.ndarray:
    """c_j = sum of values[n] over divisors n <= n_cap of j, for j <= j_max."""
    c = np.zeros(j_max + 1, dtype=np.float64)
    for n in range(1, min(n_cap, j_max) + 1):
        v = values[n]
        if v != 0.0:
            c[n::n] += v
    return c


def _tail1_ext(p: int, qden: int, k0: int) -> float:
    """sum_{k > k0} of the degree-2..5 Bernoulli terms of R_1(k p/qden).

    Same residue-class collapse as the series evaluators use: {k p/qden}
    depends on k mod qden only, so each degree contributes qden
    Hurwitz-zeta values.  Keeping degrees through 5 leaves a remainder
    below C6_R1/y^6, which is what makes long convolved heads affordable.
    """
    t = np.arange(qden, dtype=np.int64)
    k_t = k0 + 1 + ((t - (k0 + 1)) % qden)
    frac = ((t * p) % qden).astype(np.float64) / qden
    a = k_t.astype(np.float64) / qden
    out = 0.0
    for j in (2, 3, 4, 5):
        tj = fsum_array(cn.bernoulli_poly(j, frac) * hurwitz_zeta(j, a))
        out += tj / (j * float(p) ** j)
    return out


@functools.lru_cache(maxsize=1 << 20)
def _series_tail(q: int, p: int, qden: int, k0: int) -> float:
    """Analytic tail of sum_k R_q(k p/qden) beyond k0, memoized.

    The same reduced ratio recurs across coefficient kinds and outer-sum
    positions, so the cache does most of the work on the second and third
    coefficient family.
    """
    if qden > HURWITZ_Q_CAP:
        raise ResourceLimitError(
            f"series tail: denominator {qden} exceeds {HURWITZ_Q_CAP}")
    if q == 1:
        return _tail1_ext(p, qden, k0)
    return _analytic_tail(2, p, qden, k0)


def _head_length(q: int, m: int, n_cap: int, a_inf: float, tol: float) -> int:
    """Truncation J for the convolved head at tolerance tol.

    Requirements: (a) every per-n tail argument sits in the asymptotic
    regime, J/m >= ASYM_START; (b) the post-tail remainders, summed with
    weights |a_n| <= a_inf over n <= n_cap, stay below tol/2:

        q=1:  C6_R1 m^6 a_inf H(N) / (5 (J-N)^5) <= tol/2
        q=2:  C5_R2 m^5 a_inf H(N) / (4 (J-N)^4) <= tol/2.

    a_inf is rounded up to a power of two with a floor of 4 by the caller,
    so that J (and with it every tail memo key) is identical across the
    coefficient kinds of interest and their tails share one cache.
    """
    h = cn.harmonic_sum(float(n_cap))
    if q == 1:
        jeff = (2.0 * C6_R1 * m ** 6 * a_inf * h / (5.0 * tol)) ** 0.2
    else:
        jeff = (C5_R2 * m ** 5 * a_inf * h / (2.0 * tol)) ** 0.25
    j = max(int(math.ceil(jeff)) + n_cap,
            int(math.ceil(ASYM_START)) * m + n_cap)
    if j > _J_CAP:
        raise ResourceLimitError(
            f"convolved series at m={m} needs {j} head terms for tol={tol} "
            f"(cap {_J_CAP})")
    # head terms are evaluated by the R_q dispatchers, whose own asymptotic
    # branches start at the tail-start thresholds; beyond those the per-term
    # representation error could outgrow the budget, so refuse rather than
    # silently degrade
    if q == 1 and j > m * R1_TAIL_START:
        raise ResourceLimitError(
            f"convolved series at m={m}: head of {j} terms leaves the exact "
            f"R_1 range")
    if q == 2:
        head_err = a_inf * h * m * C5_R2 / (4.0 * R2_TAIL_START ** 4)
        if head_err > 0.5 * tol:
            raise ResourceLimitError(
                f"convolved series at m={m}: R_2 head error {head_err:.2e} "
                f"exceeds tol={tol}")
    return j


def _pow2_ceil(x: float) -> float:
    p = 1.0
    while p < x:
        p *= 2.0
    return p


def s_convolved(coeffs: CoefficientVector, q: int, m: int, tol: float,
                _weights: Optional[np.ndarray] = None) -> float:
    """sum_{n <= n_cap} a_n S_q(n/m) via the divisor convolution.

    _weights is a private fast path: a precomputed c_j array covering at
    least the head length this call needs (e_term builds one for its
    largest m and shares it downward).
    """
    if q not in (1, 2):
        raise InvalidArgumentError(f"s_convolved: q must be 1 or 2, got {q}")
    if int(m) != m or m < 1:
        raise InvalidArgumentError("s_convolved: m must be a positive integer")
    if not tol > 0.0:
        raise InvalidArgumentError("s_convolved: tol must be positive")
    m = int(m)
    n_cap = coeffs.n_cap
    vals = coeffs.values
    a_inf = float(np.max(np.abs(vals)))
    if a_inf == 0.0:
        return 0.0
    j_max = _head_length(q, m, n_cap, max(4.0, _pow2_ceil(a_inf)), tol)
    if _weights is not None and len(_weights) > j_max:
        c = _weights
    else:
        c = _divisor_weights(vals, n_cap, j_max)
    rfun = _R_FUN[q]
    parts = []
    for lo in range(1, j_max + 1, _CHUNK):
        hi = min(lo + _CHUNK - 1, j_max)
        y = np.arange(lo, hi + 1, dtype=np.float64) / m
        parts.append(fsum_array(c[lo:hi + 1] * rfun(y)))
    tails = []
    for n in range(1, n_cap + 1):
        an = vals[n]
        if an == 0.0:
            continue
        g = math.gcd(n, m)
        tails.append(an * _series_tail(q, n // g, m // g, j_max // n))
    return math.fsum(parts) + math.fsum(tails)


def e_term(coeffs: CoefficientVector, q: int, n_sum: int, tol: float) -> float:
    """E^(q)(N) = sum_{m<=N} (a_m/m) [sum_{n<=N} a_n S_q(n/m) - R_q(1/m)].

    The inner-sum tolerance is tol/(m H(N)): the outer 1/m weight makes a
    uniform inner budget wasteful.  One divisor-weight array, sized for the
    largest m, serves every inner sum.
    """
    if q not in (1, 2):
        raise InvalidArgumentError(f"e_term: q must be 1 or 2, got {q}")
    if int(n_sum) != n_sum or not 1 <= n_sum <= coeffs.n_cap:
        raise InvalidArgumentError(
            f"e_term: need 1 <= n_sum <= {coeffs.n_cap}, got {n_sum}")
    if not tol > 0.0:
        raise InvalidArgumentError("e_term: tol must be positive")
    n_sum = int(n_sum)
    if n_sum < coeffs.n_cap:
        coeffs = CoefficientVector(kind=coeffs.kind, n_cap=n_sum,
                                   values=coeffs.values[:n_sum + 1],
                                   abc=coeffs.abc)
    vals = coeffs.values
    a_inf = float(np.max(np.abs(vals)))
    if a_inf == 0.0:
        return 0.0
    h = cn.harmonic_sum(float(n_sum))
    j_top = _head_length(q, n_sum, n_sum, max(4.0, _pow2_ceil(a_inf)),
                         tol / (n_sum * h))
    weights = _divisor_weights(vals, n_sum, j_top)
    rq = r1 if q == 1 else r2
    terms = []
    for m in range(1, n_sum + 1):
        am = vals[m]
        if am == 0.0:
            continue
        inner = s_convolved(coeffs, q, m, tol / (m * h), _weights=weights)
        terms.append(am / m * (inner - rq(1.0 / m)))
    return math.fsum(terms)


# ---------------------------------------------------------------------------
# the quadratic form, direct and decomposed

def q_form_direct(coeffs: CoefficientVector, q: int, n_sum: int, tol: float,
                  entries: Optional[np.ndarray] = None) -> float:
    """Q_N^(q) = a^T G a over the ratio-memoized Gram matrix.

    entries is a fast path: a prebuilt (>= n_sum)^2 entry array (0-indexed,
    as gram.gram_matrix returns or gram_dense's [1:, 1:] block), so sweeps
    can build one matrix and slice.
    """
    if q not in (1, 2):
        raise InvalidArgumentError(f"q_form_direct: q must be 1 or 2, got {q}")
    if int(n_sum) != n_sum or not 1 <= n_sum <= coeffs.n_cap:
        raise InvalidArgumentError(
            f"q_form_direct: need 1 <= n_sum <= {coeffs.n_cap}, got {n_sum}")
    n_sum = int(n_sum)
    if entries is None:
        entries = gram.gram_matrix(q, n_sum, tol).entries
    elif entries.shape[0] < n_sum or entries.shape[1] < n_sum:
        raise InvalidArgumentError("q_form_direct: entry block too small")
    a = coeffs.values[1:n_sum + 1]
    return float(a @ np.ascontiguousarray(entries[:n_sum, :n_sum]) @ a)


def _decomposed_from_e(coeffs: CoefficientVector, q: int, n_sum: int,
                       e_val: float) -> float:
    c = cn.constants()
    l0 = l_term(coeffs, 0, n_sum)
    l1 = l_term(coeffs, 1, n_sum)
    m0 = m_term(coeffs, 0, n_sum)
    m1 = m_term(coeffs, 1, n_sum)
    if q == 1:
        return (m0 * (c.K * l0 + 0.5 * (l1 + 1.0))
                - 0.5 * m1 * l0
                + (c.gamma - 1.0) * l0 - l1 + e_val)
    l2 = l_term(coeffs, 2, n_sum)
    m2 = m_term(coeffs, 2, n_sum)
    return (m0 * (c.K2 * l0 + c.K1 * (l1 + 1.0) + 0.25 * (2.0 * c.gamma + l2))
            - 0.5 * m1 * (2.0 * c.K1 * l0 + l1 + 1.0)
            + 0.25 * m2 * l0
            + c.C1 * l0 + 0.5 * (2.0 * c.gamma * l1 - l2) - 2.0 * l1 + e_val)


def q_form_decomposed(coeffs: CoefficientVector, q: int, n_sum: int,
                      tol: float) -> float:
    """Q_N^(q) assembled from Mertens/Landau sums, R_q(1/m) closed forms,
    and the inversion error; algebraically equal to q_form_direct."""
    e_val = e_term(coeffs, q, n_sum, tol)
    return _decomposed_from_e(coeffs, q, n_sum, e_val)


def p_terms(coeffs: CoefficientVector, q: int, n_sum: int) -> Tuple[float, ...]:
    """The M_j-product terms of the decomposition, plus their sum.

    Returns (P_0, P_1, P_0 + P_1) for q = 1 and (P_0, P_1, P_2, sum) for
    q = 2.  Every L-factor appears in centered form (L_0, L_1 + 1,
    L_2 + 2*gamma), which is what makes the products candidates for decay.
    """
    if q not in (1, 2):
        raise InvalidArgumentError(f"p_terms: q must be 1 or 2, got {q}")
    if int(n_sum) != n_sum or not 1 <= n_sum <= coeffs.n_cap:
        raise InvalidArgumentError(
            f"p_terms: need 1 <= n_sum <= {coeffs.n_cap}, got {n_sum}")
    c = cn.constants()
    l0 = l_term(coeffs, 0, n_sum)
    l1 = l_term(coeffs, 1, n_sum)
    m0 = m_term(coeffs, 0, n_sum)
    m1 = m_term(coeffs, 1, n_sum)
    if q == 1:
        p0 = m0 * (l0 + 0.5 * (l1 + 1.0))
        p1 = m1 * l0
        return (p0, p1, p0 + p1)
    l2 = l_term(coeffs, 2, n_sum)
    m2 = m_term(coeffs, 2, n_sum)
    p0 = m0 * (c.K2 * l0 + c.K1 * (l1 + 1.0) + 0.25 * (2.0 * c.gamma + l2))
    p1 = m1 * (2.0 * c.K1 * l0 + l1 + 1.0)
    p2 = m2 * l0
    return (p0, p1, p2, p0 + p1 + p2)


# ---------------------------------------------------------------------------
# the distance report

@dataclass(frozen=True)
class QuadFormReport:
    """One d_q^2(N) evaluation with both quadratic-form routes."""

    q: int
    N: int
    kind: str
    Q_direct: float
    Q_decomposed: float
    E_term: float
    mixed: float
    d_squared: float
    P_terms: Tuple[float, ...]

    CSV_HEADER = ("kind,q,N,d_squared,mixed,Q_direct,Q_decomposed,E_term,"
                  "P0,P1,P2,P_sum")

    def to_csv_row(self) -> str:
        p = self.P_terms
        p2 = "" if self.q == 1 else f"{p[2]:.17g}"
        return (f"{self.kind},{self.q},{self.N},{self.d_squared:.17g},"
                f"{self.mixed:.17g},{self.Q_direct:.17g},"
                f"{self.Q_decomposed:.17g},{self.E_term:.17g},"
                f"{p[0]:.17g},{p[1]:.17g},{p2},{p[-1]:.17g}")

    def validate(self) -> None:
        recon = self.q - 2.0 * self.mixed + self.Q_direct
        if abs(recon - self.d_squared) > 1e-10:
            raise InvalidArgumentError(
                f"report: d^2 fails its defining identity by "
                f"{abs(recon - self.d_squared):.2e}")
        if self.d_squared < -1e-9:
            raise InvalidArgumentError(
                f"report: squared distance is negative: {self.d_squared}")


def d_squared(coeffs: CoefficientVector, q: int, n_sum: int, tol: float,
              entries: Optional[np.ndarray] = None) -> QuadFormReport:
    """Full distance report: d_q^2 = q - 2*mixed + Q, both Q routes."""
    qdir = q_form_direct(coeffs, q, n_sum, tol, entries=entries)
    e_val = e_term(coeffs, q, n_sum, tol)
    qdec = _decomposed_from_e(coeffs, q, n_sum, e_val)
    mix = mixed_sum(coeffs, q, n_sum)
    rep = QuadFormReport(
        q=q, N=int(n_sum), kind=coeffs.kind,
        Q_direct=qdir, Q_decomposed=qdec, E_term=e_val, mixed=mix,
        d_squared=q - 2.0 * mix + qdir,
        P_terms=p_terms(coeffs, q, n_sum))
    rep.validate()
    return rep


def d_via_line_integral(coeffs: CoefficientVector, q: int, n_sum: int,
                        t_max: float = 500.0, quad_tol: float = 1e-6) -> float:
    """(1/pi) int_0^T |1 - zeta(s) A(s)|^2 / |s|^(2q) dt on s = 1/2 + it.

    A(s) = sum_{n<=N} a_n n^-s.  The full line integral equals d_q^2; the
    truncation at T is a lower bound whose tail decays like T^(1-2q), so
    doubling T brackets the limit empirically.
    """
    if q not in (1, 2):
        raise InvalidArgumentError(f"line integral: q must be 1 or 2, got {q}")
    if int(n_sum) != n_sum or not 1 <= n_sum <= coeffs.n_cap:
        raise InvalidArgumentError(
            f"line integral: need 1 <= n_sum <= {coeffs.n_cap}, got {n_sum}")
    if not 0.0 < t_max <= identities.T_MAX:
        raise InvalidArgumentError(
            f"line integral: T must lie in (0, {identities.T_MAX}], got {t_max}")
    n_sum = int(n_sum)
    a = coeffs.values[1:n_sum + 1]
    logn = np.log(np.arange(1, n_sum + 1, dtype=np.float64))

    def integrand(t: float) -> float:
        s = 0.5 + 1j * t
        dirich = np.sum(a * np.exp(-s * logn))
        w = 1.0 - identities.zeta_line(s) * dirich
        return (w.real * w.real + w.imag * w.imag) / (0.25 + t * t) ** q

    val, _ = quad(integrand, 0.0, t_max, epsabs=quad_tol, epsrel=quad_tol,
                  limit=max(200, int(t_max)))
    return val / math.pi


# ---------------------------------------------------------------------------
# dense Gram builder for wide-N sweeps

def _cotvec(den: int) -> np.ndarray:
    """cot(pi k/den) for k = 1..den-1, mirror-symmetrized so the two halves
    cancel exactly in floating point."""
    k = np.arange(1, den, dtype=np.int64)
    j = np.minimum(k, den - k)
    ang = (np.pi / den) * j
    cot = np.cos(ang) / np.sin(ang) * np.where(2 * k > den, -1.0, 1.0)
    if den % 2 == 0:
        cot[den // 2 - 1] = 0.0
    return cot


def _batch_v(den: int, nums: np.ndarray, block: int = 512) -> np.ndarray:
    """Vasyunin sums V(num, den) for many numerators coprime to den."""
    if den == 1:
        return np.zeros(len(nums))
    cv = _cotvec(den)
    k = np.arange(1, den, dtype=np.int64)
    out = np.empty(len(nums))
    for lo in range(0, len(nums), block):
        nb = np.asarray(nums[lo:lo + block], dtype=np.int64)
        fr = ((k[None, :] * nb[:, None]) % den).astype(np.float64) / den
        out[lo:lo + block] = fr @ cv
    return out


def _coprime_pairs(n_max: int) -> Tuple[np.ndarray, np.ndarray]:
    """All (p, qden) with 1 <= qden < p <= n_max and gcd(p, qden) = 1."""
    ps = []
    qs = []
    for qd in range(1, n_max):
        p = np.arange(qd + 1, n_max + 1, dtype=np.int64)
        cop = np.gcd(p, qd) == 1
        ps.append(p[cop])
        qs.append(np.full(int(cop.sum()), qd, dtype=np.int64))
    return np.concatenate(ps), np.concatenate(qs)


def _a_values(p_arr: np.ndarray, qd_arr: np.ndarray, n_max: int) -> np.ndarray:
    """A(p/qd) = p * G^(1)_{qd,p} for every reduced ratio, exactly.

    Two grouped passes share one cotangent vector per denominator: first
    V(p, qd) grouped by qd, then V(qd, p) grouped by p.
    """
    vsum = np.zeros(len(p_arr))
    order = np.argsort(qd_arr, kind="stable")
    qs = qd_arr[order]
    ps = p_arr[order]
    starts = np.searchsorted(qs, np.arange(1, n_max + 1))
    ends = np.searchsorted(qs, np.arange(1, n_max + 1), side="right")
    acc = np.zeros(len(p_arr))
    for qd in range(1, n_max + 1):
        s, e = starts[qd - 1], ends[qd - 1]
        if s < e:
            acc[s:e] = _batch_v(qd, ps[s:e])
    vsum[order] += acc
    order = np.argsort(p_arr, kind="stable")
    ps = p_arr[order]
    qs = qd_arr[order]
    starts = np.searchsorted(ps, np.arange(1, n_max + 1))
    ends = np.searchsorted(ps, np.arange(1, n_max + 1), side="right")
    acc = np.zeros(len(p_arr))
    for p in range(2, n_max + 1):
        s, e = starts[p - 1], ends[p - 1]
        if s < e:
            acc[s:e] = _batch_v(p, qs[s:e])
    vsum[order] += acc
    c = cn.constants()
    r = p_arr / qd_arr
    return (0.5 * (1.0 - r) * np.log(r)
            + 0.5 * (1.0 + r) * (c.log_2pi - c.gamma)
            - (np.pi / (2.0 * qd_arr)) * vsum)


def _s2_values(p_arr: np.ndarray, qd_arr: np.ndarray,
               tol: float) -> np.ndarray:
    """S_2(p/qd) for every reduced ratio by direct short series.

    Term counts k >= (C4_R2/(3 tol))^(1/3) x^(-4/3) put the truncated tail
    under tol; ratios are bucketed by term count so each batch is one
    rectangular R_2 evaluation.
    """
    x = p_arr / qd_arr
    kneed = np.maximum((C4_R2 / (3.0 * tol)) ** (1.0 / 3.0) / x ** (4.0 / 3.0),
                       ASYM_START / x)
    kneed = np.maximum(kneed, 8.0)
    out = np.empty(len(p_arr))
    order = np.argsort(kneed)
    kord = kneed[order]
    xs = x[order]
    lo = 0
    budget = 4_000_000  # elements per rectangular batch
    while lo < len(xs):
        hi = lo
        kcap = int(math.ceil(kord[lo] * 1.4))
        while hi < len(xs) and kord[hi] <= kcap and (hi - lo + 1) * kcap <= budget:
            hi += 1
        xb = xs[lo:hi]
        kk = np.arange(1, kcap + 1, dtype=np.float64)
        terms = _r2_vec((xb[:, None] * kk[None, :]).ravel()).reshape(len(xb), kcap)
        out[lo:hi] = terms.sum(axis=1)
        lo = hi
    res = np.empty_like(out)
    res[order] = out
    return res


def gram_dense(q: int, n_max: int, s2_tol: float = 1e-11) -> np.ndarray:
    """Dense (n_max+1) x (n_max+1) Gram matrix, rows/cols 1..n_max live.

    Every entry is G^(q)_{km*, kn*} = (ratio part)/k for its reduced ratio,
    so the builder computes one value per coprime pair and scatters it along
    the multiple rays.  q = 1 needs no series at all (Vasyunin closed form);
    q = 2 evaluates S_2 once per ratio at absolute tolerance s2_tol.
    """
    if q not in (1, 2):
        raise InvalidArgumentError(f"gram_dense: q must be 1 or 2, got {q}")
    if int(n_max) != n_max or n_max < 1:
        raise InvalidArgumentError("gram_dense: n_max must be a positive integer")
    if n_max > _DENSE_CAP:
        raise ResourceLimitError(
            f"gram_dense: n_max={n_max} exceeds the dense cap {_DENSE_CAP}")
    n_max = int(n_max)
    c = cn.constants()
    g = np.zeros((n_max + 1, n_max + 1), dtype=np.float64)
    m = np.arange(1, n_max + 1, dtype=np.float64)
    if q == 1:
        g[np.arange(1, n_max + 1), np.arange(1, n_max + 1)] = \
            (c.log_2pi - c.gamma) / m
    else:
        s2_one = s2_frac(1, 1, 1e-13).value
        g[np.arange(1, n_max + 1), np.arange(1, n_max + 1)] = \
            (c.K2 + s2_one) / m
    if n_max == 1:
        return g
    p_arr, qd_arr = _coprime_pairs(n_max)
    order = np.argsort(p_arr, kind="stable")  # fill loop slices prefixes by p
    p_arr, qd_arr = p_arr[order], qd_arr[order]
    lr = np.log(p_arr / qd_arr)
    if q == 1:
        ratio_num = _a_values(p_arr, qd_arr, n_max)  # A(p/qd) = p * G_{qd,p}
    else:
        s2 = _s2_values(p_arr, qd_arr, s2_tol)
    for k in range(1, n_max // 2 + 1):
        top = n_max // k
        cnt = int(np.searchsorted(p_arr, top, side="right"))
        if cnt == 0:
            break
        rows = k * qd_arr[:cnt]
        cols = k * p_arr[:cnt]
        if q == 1:
            vals = ratio_num[:cnt] / cols
        else:
            vals = ((c.K2 + c.K1 * lr[:cnt] + 0.25 * lr[:cnt] ** 2) / cols
                    + s2[:cnt] / rows)
        g[rows, cols] = vals
        g[cols, rows] = vals
    return g


def d_sweep(q: int, n_grid: Sequence[int],
            kinds: Iterable[str] = ("lambda", "nu"),
            s2_tol: float = 1e-11) -> Dict[str, np.ndarray]:
    """d_q^2(N) along n_grid for each coefficient kind, one dense Gram fill.

    Returns {kind: array of d^2 values aligned with n_grid}.  The scaled
    plot quantities are sqrt(d^2 log N) for q = 1 and sqrt(d^2) log N for
    q = 2.
    """
    grid = [int(n) for n in n_grid]
    if not grid or any(n < 1 for n in grid) or sorted(grid) != grid:
        raise InvalidArgumentError("d_sweep: n_grid must be ascending positive")
    n_top = grid[-1]
    g = gram_dense(q, n_top, s2_tol=s2_tol)
    fv = _f_vec(q, n_top)
    abc = solve_abc()
    out: Dict[str, np.ndarray] = {}
    for kind in kinds:
        d2 = np.empty(len(grid))
        for i, n in enumerate(grid):
            co = coefficients(kind, n, abc=abc if kind == "nu" else None)
            a = np.zeros(n_top + 1)
            a[:n + 1] = co.values
            mix = fsum_array(co.values[1:] * fv[1:n + 1])
            d2[i] = q - 2.0 * mix + float(a @ g @ a)
        out[kind] = d2
    return out
