"""Gram kernels of the Nyman-Beurling dilation family.

Both kernels are driven by the Muntz-type dilation series S_q:

    G1_{u,v} = (1/v)(K + (1/2) log(v/u)) + (1/u) S1(v/u)
    G2_{u,v} = (1/v)(K2 + K1 log(v/u) + (1/4) log^2(v/u)) + (1/u) S2(v/u)

The kernels are symmetric in (u, v) although these formulas hide it, and
they admit several genuinely different evaluation routes that this module
keeps deliberately independent so they can cross-validate each other:

  * g1 / g2                  the formulas above (S_q series layer),
  * g1_symmetric /           convex combinations of the formula and its
    g2_symmetric             transpose: the ratio-weighted combination
                             deletes the log terms, the equal-weight one
                             averages them,
  * g2_alt                   a K1-form whose only transcendental inputs
                             are two integrals of S1(t)/t,
  * autocorr                 A(r) = int_0^inf {xr}{x} x^-2 dx by panelled
                             quadrature plus an analytic mean-value tail;
                             A(n/m) = n G1_{m,n} makes it an S-free oracle,
  * vasyunin_sum             cotangent closed form for A at rationals,
  * g2_via_double_integral   the scale-average identity
                             G2_{u,v} = int_0^1 int_0^1 G1_{ux,vy} dx dy,
                             reduced exactly to a single integral.

gram_matrix assembles G^(q)_{m,n} for 1 <= m, n <= n_max with the S_q
values memoised on reduced ratios n/m (about 3 n_max^2 / pi^2 distinct
ones), which removes every duplicate series evaluation.  The memo is a
plain dict keyed by the reduced fraction; insert-or-get on it is atomic
under the interpreter lock and the values are deterministic, so parallel
entry workers sharing it would only ever race benignly.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import constants as cn
from .accum import fsum_array
from .errors import (DataFormatError, InvalidArgumentError, NumericalError,
                     ResourceLimitError)
from .muntz import (ASYM_START, _corr_mean, _r1_vec, _v_vec, s1, s1_frac,
                    s1_log_integral, s2, s2_frac)
from .quadrature import integrate

_VARIANTS = ("weighted", "equal")


def _check_uv(u: float, v: float) -> None:
    if not (u > 0.0 and v > 0.0 and math.isfinite(u) and math.isfinite(v)):
        raise InvalidArgumentError("kernel arguments must be finite and > 0")


# ---------------------------------------------------------------------------
# Direct closed forms and their symmetrised convex combinations

def g1(u: float, v: float, tol: float = 1e-10) -> float:
    """First kernel via its closed form; S1 evaluated to tolerance tol*u."""
    _check_uv(u, v)
    c = cn.constants()
    return (c.K + 0.5 * math.log(v / u)) / v + s1(v / u, tol * u).value / u


def g2(u: float, v: float, tol: float = 1e-10) -> float:
    """Second kernel via its closed form; S2 evaluated to tolerance tol*u."""
    _check_uv(u, v)
    c = cn.constants()
    ell = math.log(v / u)
    return (c.K2 + c.K1 * ell + 0.25 * ell * ell) / v + s2(v / u, tol * u).value / u


def _variant_check(variant: str) -> None:
    if variant not in _VARIANTS:
        raise InvalidArgumentError(
            f"variant must be one of {_VARIANTS}, got {variant!r}")


def g1_symmetric(u: float, v: float, tol: float = 1e-10,
                 variant: str = "weighted") -> float:
    """Manifestly symmetric forms of the first kernel.

    weighted: [2K + (v/u)S1(v/u) + (u/v)S1(u/v)] / (u+v)   (log terms cancel)
    equal:    (1/2)[K(1/v+1/u) + (1/2)(1/v-1/u)log(v/u)
                    + S1(u/v)/v + S1(v/u)/u]
    """
    _check_uv(u, v)
    _variant_check(variant)
    c = cn.constants()
    if variant == "weighted":
        # each series enters with weight (v/u)/(u+v) resp. (u/v)/(u+v)
        svu = s1(v / u, 0.5 * tol * u * (u + v) / v).value
        suv = s1(u / v, 0.5 * tol * v * (u + v) / u).value
        return (2.0 * c.K + (v / u) * svu + (u / v) * suv) / (u + v)
    ell = math.log(v / u)
    suv = s1(u / v, tol * v).value
    svu = s1(v / u, tol * u).value
    return 0.5 * (c.K * (1.0 / v + 1.0 / u)
                  + 0.5 * (1.0 / v - 1.0 / u) * ell
                  + suv / v + svu / u)


def g2_symmetric(u: float, v: float, tol: float = 1e-10,
                 variant: str = "weighted") -> float:
    """Manifestly symmetric forms of the second kernel.

    weighted: [2K2 + (1/2)log^2(v/u) + (v/u)S2(v/u) + (u/v)S2(u/v)] / (u+v)
    equal:    (1/2)[(K2 + (1/4)log^2(v/u))(1/v+1/u)
                    + K1(1/v-1/u)log(v/u) + S2(u/v)/v + S2(v/u)/u]
    """
    _check_uv(u, v)
    _variant_check(variant)
    c = cn.constants()
    ell = math.log(v / u)
    if variant == "weighted":
        svu = s2(v / u, 0.5 * tol * u * (u + v) / v).value
        suv = s2(u / v, 0.5 * tol * v * (u + v) / u).value
        return (2.0 * c.K2 + 0.5 * ell * ell
                + (v / u) * svu + (u / v) * suv) / (u + v)
    suv = s2(u / v, tol * v).value
    svu = s2(v / u, tol * u).value
    return 0.5 * ((c.K2 + 0.25 * ell * ell) * (1.0 / v + 1.0 / u)
                  + c.K1 * (1.0 / v - 1.0 / u) * ell
                  + suv / v + svu / u)


def g2_alt(u: float, v: float, tol: float = 1e-8) -> float:
    """Second kernel from first-kernel data only:

        G2 = K1(1/v + 1/u) + (1/2)(1/v - 1/u) log(v/u)
             + (1/v) int_{u/v}^inf S1(t)/t dt + (1/u) int_{v/u}^inf S1(t)/t dt.

    Numerical confirmation of the K1-representation; the integrals come
    from the V-series identity behind s1_log_integral.
    """
    _check_uv(u, v)
    ell = math.log(v / u)
    c = cn.constants()
    return (c.K1 * (1.0 / v + 1.0 / u)
            + 0.5 * (1.0 / v - 1.0 / u) * ell
            + s1_log_integral(u / v, 0.5 * tol * v) / v
            + s1_log_integral(v / u, 0.5 * tol * u) / u)


# ---------------------------------------------------------------------------
# Fractional-part autocorrelation A(r) = int_0^inf {xr}{x} x^-2 dx

def _near_fraction(r: float, max_den: int = 4096, rel: float = 1e-9):
    """(p, q) with |r - p/q| <= rel*max(1, r) and q <= max_den, else None."""
    fr = Fraction(r).limit_denominator(max_den)
    if fr.numerator >= 1 and abs(r - float(fr)) <= rel * max(1.0, r):
        return fr.numerator, fr.denominator
    return None


def _fracprod_quad(r: float, a: float, b: float, tol: float):
    """integral_a^b {xr}{x} x^-2 dx, blockwise so panel batches stay small.

    Between consecutive breakpoints (integers and multiples of 1/r) the
    integrand is a quadratic over x^2, so low-order panels converge at once.
    """
    def f(x: np.ndarray) -> np.ndarray:
        xr = x * r
        return (xr - np.floor(xr)) * (x - np.floor(x)) / (x * x)

    total = 0.0
    step = max(2.0, 20000.0 / (1.0 + r))  # ~2e4 seeded panels per block
    lo = a
    while lo < b:
        hi = min(b, lo + step)
        ks = np.arange(math.floor(lo) + 1, math.ceil(hi), dtype=np.float64)
        js = np.arange(math.floor(lo * r) + 1, math.ceil(hi * r),
                       dtype=np.float64) / r
        val, _ = integrate(f, lo, hi, tol * (hi - lo) / (b - a),
                           breakpoints=np.concatenate([ks, js]), order=6)
        total += val
        lo = hi
    return total


def _autocorr_frac(p: int, q: int, quad_tol: float) -> float:
    """A(p/q) with the exact period-q mean tail.

    With T a multiple of q (so {T} = {Tr} = 0) the tail splits as

        int_T^inf {xr}{x} x^-2 dx = (1/4 + rho)/T - (1 + 1/r)/(24 T^2) + eps,

    rho = mean of ({xr}-1/2)({x}-1/2) over one period, |eps| bounded by
    q/(6T^2) (oscillation of the centered product, integrated by parts)
    plus O(T^-3) Bernoulli remainders.  T is pushed until eps <= quad_tol/2.
    """
    g = math.gcd(p, q)
    p, q = p // g, q // g
    r = p / q
    rho = _corr_mean(p, q)
    t_req = math.sqrt(2.0 * max(0.17 * q + 0.02 * (1.0 + 1.0 / r), 0.05)
                      / quad_tol)
    T = q * int(math.ceil(max(100.0, 100.0 / r, t_req) / q))
    head = min(r, 1.0)  # below min(1, 1/r) the integrand is exactly r
    quad = _fracprod_quad(r, min(1.0, 1.0 / r), float(T), 0.5 * quad_tol)
    tail = (0.25 + rho) / T - (1.0 + 1.0 / r) / (24.0 * T * T)
    return head + quad + tail


def autocorr(r: float, quad_tol: float = 1e-6) -> float:
    """A(r) = int_0^inf {xr}{x} x^-2 dx.

    Arguments within 1e-9 (relative) of a fraction with denominator <= 4096
    are evaluated at that fraction, where the truncated tail has an exact
    period mean.  Other arguments fall back to the equidistribution tail
    mean 1/4, which forces the cutoff up to ~0.5/quad_tol; tolerances below
    ~2.5e-7 are refused there rather than silently degraded.
    """
    if not (r > 0.0 and math.isfinite(r)):
        raise InvalidArgumentError("autocorr: r must be finite and > 0")
    if not (quad_tol > 0.0):
        raise InvalidArgumentError("autocorr: quad_tol must be positive")
    pq = _near_fraction(r)
    if pq is not None:
        return _autocorr_frac(pq[0], pq[1], quad_tol)
    T = math.ceil(max(100.0, 100.0 / r, 0.5 / quad_tol))
    if T > 2_000_000:
        raise ResourceLimitError(
            f"autocorr tail needs cutoff {T} for tol={quad_tol} at "
            "non-rational r; use a rational argument or a coarser tolerance")
    head = min(r, 1.0)
    quad = _fracprod_quad(r, min(1.0, 1.0 / r), float(T), 0.5 * quad_tol)
    return head + quad + 0.25 / T - 1.0 / (24.0 * T * T)


def g1_via_autocorr(m: int, n: int, quad_tol: float = 1e-6) -> float:
    """G1_{m,n} = A(n/m)/n: a first-kernel oracle that never touches S1."""
    if m < 1 or n < 1 or m != int(m) or n != int(n):
        raise InvalidArgumentError("g1_via_autocorr: m, n must be integers >= 1")
    g = math.gcd(int(m), int(n))
    return _autocorr_frac(int(n) // g, int(m) // g, quad_tol * n) / n


# ---------------------------------------------------------------------------
# Scale-average route to the second kernel

# Lambda(a) = int_a^inf r1(y) dy/y.  On [n, n+1) the integrand is
# elementary, and writing H_n = log n + gamma + h_n cancels every log n
# symbolically, leaving the O(n^-5) interval integrals
#
#   Lambda_n = (1/2) ell^2 - (1 + h_n) ell + (n + 1/2)/(n(n+1)),
#   ell = log(1 + 1/n),
#
# so a cached suffix table makes Lambda an O(1) lookup.  (Sum-to-integral
# error of the table: |Lambda| <= 0.01/a^3 empirically from a = 1 on, so
# cutting at _LAM_N1 = 4096 costs < 1e-16; beyond the table the single
# Bernoulli term -B3({a})/(6a^3) is already accurate to ~0.03/a^4.)

_LAM_N1 = 4096


def _lam_h(n: np.ndarray) -> np.ndarray:
    """H_n - log n - gamma without forming the large parts."""
    h = np.empty_like(n)
    small = n < ASYM_START
    if np.any(small):
        ni = n[small].astype(np.int64)
        h[small] = cn.harmonic_table()[ni] - np.log(n[small]) - cn.GAMMA
    if np.any(~small):
        ib = 1.0 / n[~small]
        ib2 = ib * ib
        h[~small] = 0.5 * ib - ib2 / 12.0 + ib2 * ib2 / 120.0 - ib2 * ib2 * ib2 / 252.0
    return h


@functools.lru_cache(maxsize=None)
def _lam_suffix() -> np.ndarray:
    n = np.arange(1, _LAM_N1 + 1, dtype=np.float64)
    ell = np.log1p(1.0 / n)
    lam_n = (0.5 * ell * ell - (1.0 + _lam_h(n)) * ell
             + (n + 0.5) / (n * (n + 1.0)))
    suf = np.zeros(_LAM_N1 + 2)
    suf[1:_LAM_N1 + 1] = np.cumsum(lam_n[::-1])[::-1]
    return suf


def _lam_vec(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    out = np.empty_like(a)
    big = a >= float(_LAM_N1 - 1)
    if np.any(big):
        t = a[big]
        out[big] = -cn.bernoulli_poly(3, t - np.floor(t)) / (6.0 * t ** 3)
    if np.any(~big):
        t = a[~big]
        n = np.floor(t)
        b = n + 1.0
        # partial interval [a, ceil(a)], same symbolic cancellation
        part = ((0.5 * (np.log1p((t - n) / n) + np.log1p(1.0 / n))
                 - _lam_h(n) - 1.0) * np.log1p((b - t) / t)
                + (n + 0.5) * (1.0 / t - 1.0 / b))
        out[~big] = part + _lam_suffix()[b.astype(np.int64)]
    return out


def g2_via_double_integral(u: float, v: float, quad_tol: float = 1e-6) -> float:
    """G2_{u,v} = int_0^1 int_0^1 G1_{ux,vy} dx dy, reduced to one dimension.

    Substituting x = e^-s, y = e^-t (which removes the integrable log
    singularities at the axes) and integrating out the diagonal direction
    exactly leaves a line integral of G1_{1,rho} against min(1, rho/rho0),
    rho0 = v/u.  Mapping both half-lines onto ratio arguments t >= 1 (the
    rho < 1 side through the S1 reciprocity law, so the series is never
    needed at small arguments) splits the integrand into an elementary
    part, integrated in closed form, plus

        Q = int_1^inf S1(t) w(t) dt,
    w(t) = min(1, t/rho0)/t + min(1, 1/(t rho0)).

    Q is integrated term by term in the dilation index k.  The first k0
    terms r1(kt) (which carry all but ~1e-4 of Q) go through seeded
    quadrature of the closed-form kernel on [1, t_end]; everything else
    is summed in closed form, because against the flat pieces of w each
    term integrates to a difference of V (the elementary antiderivative
    of r1) and against the 1/t pieces to a difference of Lambda.  Beyond
    the quadrature the route is exact, so its error is the quadrature
    estimate plus the k-sum cut at K1 (bounded by the V/Lambda envelopes
    0.013/y^2 and 0.01/y^3, valid from y = 1).  No S2 data and no
    second-kernel constants enter anywhere, so the agreement with g2 is
    a genuine cross-check of the scale-average identity.
    """
    _check_uv(u, v)
    if not (quad_tol > 0.0):
        raise InvalidArgumentError("g2_via_double_integral: quad_tol must be > 0")
    rho0 = v / u
    ell0 = math.log(rho0)
    c = cn.constants()
    # closed forms of the elementary (K + log/2) parts on each fold side
    if rho0 >= 1.0:
        elem = ((c.K * ell0 + 0.25 * ell0 * ell0
                 + c.K + 0.5 + 0.5 * ell0) + (c.K + 0.5)) / rho0
    else:
        elem = (c.K + 0.5) + (-c.K * ell0 + 0.25 * ell0 * ell0
                              + c.K + 0.5 - 0.5 * ell0)

    budget = quad_tol * max(u, 1e-300)
    inv = 1.0 / rho0
    # past t_end both w pieces are 1/t; keep the quadrature window clear of
    # the w kinks so the truncated pieces are pure Lambda differences
    t_end = max(rho0, inv) + 1.0 if max(rho0, inv) > 11.0 else 12.0

    def weight(ts: np.ndarray) -> np.ndarray:
        return (np.minimum(1.0, ts / rho0) / ts
                + np.minimum(1.0, inv / ts))

    k0 = 8
    quad = 0.0
    for k in range(1, k0 + 1):
        def term(ts: np.ndarray, kk=float(k)) -> np.ndarray:
            return _r1_vec(kk * ts) * weight(ts)

        brk = np.concatenate([np.arange(math.ceil(k), k * t_end) / k,
                              np.array([rho0, inv])])
        val, _ = integrate(term, 1.0, t_end, 0.25 * budget / k0,
                           breakpoints=brk, order=8)
        quad += val
    # truncated [t_end, inf) pieces of the quadratured terms
    ks_low = np.arange(1, k0 + 1, dtype=np.float64)
    quad += (1.0 + inv) * fsum_array(_lam_vec(ks_low * t_end))

    # k > k0 exactly: w's flat pieces give V differences, 1/t pieces Lambda
    k1 = max(k0 + 8, int(math.ceil(math.sqrt(0.2 * (1.0 + inv) / budget))))
    ks = np.arange(k0 + 1, k1 + 1, dtype=np.float64)
    if rho0 > 1.0:
        tk = ((_v_vec(ks) - _v_vec(ks * rho0)) / (ks * rho0)
              + _lam_vec(ks * rho0) + inv * _lam_vec(ks))
    elif rho0 < 1.0:
        tk = ((_v_vec(ks) - _v_vec(ks * inv)) / ks
              + inv * _lam_vec(ks * inv) + _lam_vec(ks))
    else:
        tk = 2.0 * _lam_vec(ks)
    return (elem + quad + fsum_array(tk)) / u


# ---------------------------------------------------------------------------
# Vasyunin cotangent closed form

def vasyunin_sum(n: int, m: int) -> float:
    """V(n, m) = sum_{k=1}^{m-1} {kn/m} cot(pi k/m) for coprime n, m.

    Exact integer arithmetic for the fractional parts; the cotangent is
    taken at the mirrored index min(k, m-k) so its relative accuracy does
    not degrade near k = m (and the k = m/2 term is exactly zero).
    """
    n, m = int(n), int(m)
    if n < 1 or m < 1:
        raise InvalidArgumentError("vasyunin_sum: need integers n, m >= 1")
    if math.gcd(n, m) != 1:
        raise InvalidArgumentError(
            f"vasyunin_sum: arguments must be coprime, got gcd={math.gcd(n, m)}")
    if m == 1:
        return 0.0
    if n < (1 << 62) // m:
        k = np.arange(1, m, dtype=np.int64)
        frac = ((k * n) % m).astype(np.float64) / m
    else:
        k = np.arange(1, m, dtype=object)
        frac = np.array([(kk * n) % m for kk in range(1, m)],
                        dtype=np.float64) / m
        k = np.arange(1, m, dtype=np.int64)
    j = np.minimum(k, m - k)
    ang = (np.pi / m) * j
    cot = np.cos(ang) / np.sin(ang) * np.where(2 * k > m, -1.0, 1.0)
    if m % 2 == 0:
        cot[m // 2 - 1] = 0.0
    return fsum_array(frac * cot)


def autocorr_via_vasyunin(n: int, m: int) -> float:
    """A(n/m) in closed form:

        A(r) = (1-r)/2 log r + (1+r)/2 (log 2pi - gamma)
               - pi/(2m) [V(n,m) + V(m,n)],  r = n/m coprime.
    """
    n, m = int(n), int(m)
    if n < 1 or m < 1:
        raise InvalidArgumentError("autocorr_via_vasyunin: need n, m >= 1")
    if math.gcd(n, m) != 1:
        raise InvalidArgumentError("autocorr_via_vasyunin: n, m must be coprime")
    r = n / m
    c = cn.constants()
    return (0.5 * (1.0 - r) * math.log(r)
            + 0.5 * (1.0 + r) * (c.log_2pi - c.gamma)
            - (math.pi / (2.0 * m)) * (vasyunin_sum(n, m) + vasyunin_sum(m, n)))


# ---------------------------------------------------------------------------
# Gram matrices

@dataclass
class GramMatrix:
    """Kernel matrix G^(q)_{m,n}, 1 <= m, n <= n."""

    q: int
    n: int
    entries: np.ndarray

    def validate(self, psd_limit: int = 50) -> None:
        """Check symmetry and (for small n) positive semidefiniteness."""
        e = np.asarray(self.entries, dtype=np.float64)
        if self.q not in (1, 2) or self.n < 1 or e.shape != (self.n, self.n):
            raise DataFormatError("GramMatrix fields are inconsistent")
        scale = np.max(np.abs(e))
        if np.max(np.abs(e - e.T)) > 1e-10 * max(scale, 1.0):
            raise NumericalError("GramMatrix is not symmetric")
        if self.n <= psd_limit:
            w = np.linalg.eigvalsh(0.5 * (e + e.T))
            if w[0] < -1e-8 * np.trace(e):
                raise NumericalError(
                    f"GramMatrix has eigenvalue {w[0]:.3e} below the PSD slack")

    def to_csv(self, path) -> None:
        """Row-major CSV with a '# q,n_max: ...' comment header."""
        with open(path, "w") as fh:
            fh.write(f"# q,n_max: {self.q},{self.n}\n")
            for row in np.asarray(self.entries):
                fh.write(",".join(f"{x:.17g}" for x in row) + "\n")

    @classmethod
    def from_csv(cls, path) -> "GramMatrix":
        with open(path) as fh:
            header = fh.readline().strip()
            if not header.startswith("# q,n_max:"):
                raise DataFormatError(f"bad GramMatrix header: {header!r}")
            try:
                qs, ns = header.split(":", 1)[1].split(",")
                q, n = int(qs), int(ns)
                rows = [[float(tok) for tok in line.strip().split(",")]
                        for line in fh if line.strip()]
            except ValueError as exc:
                raise DataFormatError(f"bad GramMatrix payload: {exc}") from exc
        if len(rows) != n or any(len(row) != n for row in rows):
            raise DataFormatError(
                f"GramMatrix payload is not {n}x{n} as the header claims")
        return cls(q=q, n=n, entries=np.asarray(rows, dtype=np.float64))


def gram_matrix(q: int, n_max: int, tol: float = 1e-10) -> GramMatrix:
    """G^(q)_{m,n} for 1 <= m, n <= n_max with ratio-deduplicated series.

    Every entry with the same reduced ratio n/m = p/qd shares one S_q value,
    computed at tolerance tol*qd: the entry weight is 1/m <= 1/qd, so each
    entry stays within tol.  Entries are filled on the upper triangle and
    mirrored (the kernel is symmetric; dual-route symmetry checks live with
    the pointwise evaluators).
    """
    if q not in (1, 2):
        raise InvalidArgumentError(f"gram_matrix: q must be 1 or 2, got {q}")
    if int(n_max) != n_max or n_max <= 0:
        raise InvalidArgumentError("gram_matrix: n_max must be a positive integer")
    n_max = int(n_max)
    c = cn.constants()
    sfrac = s1_frac if q == 1 else s2_frac
    memo: dict = {}
    ent = np.empty((n_max, n_max), dtype=np.float64)
    for m in range(1, n_max + 1):
        for n in range(m, n_max + 1):
            g = math.gcd(m, n)
            p, qd = n // g, m // g
            key = (p, qd)
            sval = memo.get(key)
            if sval is None:
                sval = sfrac(p, qd, tol * qd).value
                memo[key] = sval
            ell = math.log(p / qd)
            if q == 1:
                val = (c.K + 0.5 * ell) / n + sval / m
            else:
                val = (c.K2 + c.K1 * ell + 0.25 * ell * ell) / n + sval / m
            ent[m - 1, n - 1] = val
            ent[n - 1, m - 1] = val
    gm = GramMatrix(q=q, n=n_max, entries=ent)
    gm.validate()
    return gm
