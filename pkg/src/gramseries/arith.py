"""Mobius coefficients, the eta linear system, and summatory traces.

Coefficient families entering the Nyman-Beurling quadratic forms:

    mobius   a_n = mu(n)
    lambda   a_n = mu(n) (1 - log n / log N)
    nu       a_n = mu(n) (1 - [log n + a log n / n + b / n] / log N)
                   - c / (n log N)

The (a, b, c) triple for the nu family solves a 3x3 system built from
eta_j = sum mu(n) log^j n / n^2 (derivatives of 1/zeta at 2) together
with zeta(2) and its derivatives, chosen so that the weighted sums

    L_j(N) = sum_{n<=N} a_n log^j n / n,    M_j(N) = sum_{n<=N} a_n log^j n

approach their limits  Lbar_j(N) = L_j(N) + ell_j -> 0  at an improved
rate.  The ell_j offsets are (0, 1, 2 gamma, 6 (gamma^2 + gamma_1)).

The trace machinery samples L_j, M_j and their rescaled / differenced
variants along an increasing N-grid in a single streaming pass.  For the
lambda and nu families every column is an exact linear recombination of
the plain-Mobius prefix sums, e.g.

    L_{lambda,j}(N) = L_{mu,j}(N) - L_{mu,j+1}(N) / log N,

so one sweep over n <= max(grid) with a handful of compensated
accumulators serves all three families; no per-N rescans.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import constants as cn
from .accum import Kahan
from .errors import InvalidArgumentError, NumericalError, ResourceLimitError


def _xsum(a: np.ndarray) -> float:
    # exact (correctly rounded) sum; the trace bookkeeping is checked
    # against per-N recomputation at 1e-12, which pairwise np.sum with
    # its ~1e-11 drift on cancellation-heavy Mobius sums would fail
    return float(math.fsum(a))

KINDS = ("mobius", "lambda", "nu")

# Default ceiling for sieve allocations: mu table (int8) plus an int64
# scratch array costs ~9 bytes/n, so 1e7 stays under 100 MB.
SIEVE_CAP = 10_000_000

_CHUNK = 1 << 20


@dataclass(frozen=True)
class MobiusTable:
    """Mobius function values mu[n] for 0 <= n <= n_max (mu[0] = 0)."""

    n_max: int
    mu: np.ndarray


def mobius_sieve(n_max: int, cap: int = SIEVE_CAP) -> MobiusTable:
    """Tabulate mu(1..n_max) with a vectorized squarefree sieve.

    For each prime p <= sqrt(n_max): flip the sign on multiples of p,
    zero out multiples of p^2, and accumulate p into a running product.
    Afterwards any n whose accumulated product falls short of n itself
    has exactly one prime factor > sqrt(n_max) left, accounting for one
    more sign flip.
    """
    if n_max < 1:
        raise InvalidArgumentError("mobius_sieve: n_max must be >= 1")
    if n_max > cap:
        raise ResourceLimitError(
            f"mobius_sieve: n_max={n_max} exceeds cap={cap}")
    mu = np.ones(n_max + 1, dtype=np.int8)
    mu[0] = 0
    if n_max >= 4:
        # int64 product of the primes <= sqrt(n_max) dividing each n;
        # n_max <= 1e7 keeps the product well inside int64.
        prod = np.ones(n_max + 1, dtype=np.int64)
        root = math.isqrt(n_max)
        is_prime = np.ones(root + 1, dtype=bool)
        is_prime[:2] = False
        for p in range(2, root + 1):
            if not is_prime[p]:
                continue
            is_prime[p * p::p] = False
            mu[p::p] *= -1
            mu[p * p::p * p] = 0
            prod[p::p] *= p
        rest = prod < np.arange(n_max + 1, dtype=np.int64)
        mu[rest] *= -1
    elif n_max >= 2:
        mu[2] = -1
        if n_max == 3:
            mu[3] = -1
    return MobiusTable(n_max=n_max, mu=mu)


def solve_abc() -> tuple[float, float, float]:
    """Solve the 3x3 system fixing the nu-family constants (a, b, c).

    Rows impose the first-, second-, and third-moment matching
    conditions; the matrix mixes eta_j with zeta(2) and its first two
    derivatives, the right side is (1, 2 gamma, 6 (gamma^2 + gamma_1)).
    """
    c = cn.constants()
    e0, e1, e2, e3 = c.eta
    mat = np.array([
        [e1, e0, c.zeta2],
        [e2, e1, -c.zeta2_d1],
        [e3, e2, c.zeta2_d2],
    ])
    rhs = np.array([1.0, c.ell[2], c.ell[3]])
    det = np.linalg.det(mat)
    if not math.isfinite(det) or abs(det) < 1e-12:
        raise NumericalError(f"solve_abc: near-singular system, det={det}")
    sol = np.linalg.solve(mat, rhs)
    return float(sol[0]), float(sol[1]), float(sol[2])


@dataclass(frozen=True)
class CoefficientVector:
    """Materialized coefficients a_1..a_{n_cap} (values[0] unused = 0)."""

    kind: str
    n_cap: int
    values: np.ndarray
    abc: tuple[float, float, float] | None = None


def coefficients(kind: str, n_cap: int,
                 abc: tuple[float, float, float] | None = None,
                 ) -> CoefficientVector:
    """Build the coefficient vector of the given family at cutoff n_cap.

    The lambda and nu weights divide by log N with N = n_cap.  At n_cap=1
    the mobius and lambda vectors are still exact (the lone n=1 weight
    carries log 1 = 0, so the division never materializes) but the nu
    correction -c/(n log N) is genuinely singular, so nu requires
    n_cap >= 2.  For kind="nu" the (a, b, c) triple defaults to
    solve_abc().
    """
    if kind not in KINDS:
        raise InvalidArgumentError(f"coefficients: unknown kind {kind!r}")
    if int(n_cap) != n_cap or n_cap < 1:
        raise InvalidArgumentError("coefficients: n_cap must be a positive integer")
    if n_cap == 1:
        if kind == "nu":
            raise InvalidArgumentError(
                "coefficients: the nu family is undefined at n_cap=1 "
                "(its 1/log N normalization is singular)")
        return CoefficientVector(kind=kind, n_cap=1,
                                 values=np.array([0.0, 1.0]), abc=None)
    mu = mobius_sieve(n_cap).mu.astype(np.float64)
    n = np.arange(n_cap + 1, dtype=np.float64)
    n[0] = 1.0  # avoid log(0)/division warnings in the unused slot
    logn = np.log(n)
    log_cap = math.log(n_cap)
    if kind == "mobius":
        vals = mu
        abc_out = None
    elif kind == "lambda":
        vals = mu * (1.0 - logn / log_cap)
        abc_out = None
    else:
        if abc is None:
            abc = solve_abc()
        a, b, c = abc
        vals = (mu * (1.0 - (logn + a * logn / n + b / n) / log_cap)
                - c / (n * log_cap))
        abc_out = (float(a), float(b), float(c))
    vals[0] = 0.0
    return CoefficientVector(kind=kind, n_cap=n_cap, values=vals,
                             abc=abc_out)


def _check_term_args(coeffs: CoefficientVector, j: int, n_sum: int) -> None:
    if not 0 <= j <= 3:
        raise InvalidArgumentError(f"log-moment order j={j} not in 0..3")
    if not 1 <= n_sum <= coeffs.n_cap:
        raise InvalidArgumentError(
            f"summation cutoff N={n_sum} not in 1..n_cap={coeffs.n_cap}")


def l_term(coeffs: CoefficientVector, j: int, n_sum: int) -> float:
    """L_j(N) = sum_{n<=N} a_n log^j n / n, compensated."""
    _check_term_args(coeffs, j, n_sum)
    n = np.arange(1, n_sum + 1, dtype=np.float64)
    return _xsum(coeffs.values[1:n_sum + 1] * np.log(n) ** j / n)


def m_term(coeffs: CoefficientVector, j: int, n_sum: int) -> float:
    """M_j(N) = sum_{n<=N} a_n log^j n, compensated."""
    _check_term_args(coeffs, j, n_sum)
    n = np.arange(1, n_sum + 1, dtype=np.float64)
    return _xsum(coeffs.values[1:n_sum + 1] * np.log(n) ** j)


@dataclass(frozen=True)
class TraceTable:
    """Sampled summatory traces of one coefficient family.

    Arrays are indexed [grid point, j].  Column layout mirrors to_csv:
    L_j and M_j for j=0..3, Lbar_j = L_j + ell_j, the rescaled variants
    Ltil_j = Lbar_j / log^j N and Mtil_j = M_j / log^j N for j=0..2, and
    the differences dLbar_j = Lbar_j - Lbar_{j+1}/log N (similarly dM_j)
    for j=0..2.
    """

    kind: str
    n_grid: np.ndarray
    l: np.ndarray
    lbar: np.ndarray
    m: np.ndarray
    ltil: np.ndarray
    mtil: np.ndarray
    dlbar: np.ndarray
    dm: np.ndarray
    abc: tuple[float, float, float] | None = None

    _HEADER = ("N,L0,L1,L2,L3,Lbar0,Lbar1,Lbar2,Lbar3,M0,M1,M2,M3,"
               "Ltil0,Ltil1,Ltil2,Mtil0,Mtil1,Mtil2,"
               "dLbar0,dLbar1,dLbar2,dM0,dM1,dM2")

    def to_csv(self, path=None) -> str:
        lines = [self._HEADER]
        for i, n in enumerate(self.n_grid):
            row = np.concatenate([
                self.l[i], self.lbar[i], self.m[i],
                self.ltil[i], self.mtil[i], self.dlbar[i], self.dm[i],
            ])
            lines.append(str(int(n)) + ","
                         + ",".join(f"{x:.17g}" for x in row))
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def trace_table(kind: str, n_grid,
                abc: tuple[float, float, float] | None = None) -> TraceTable:
    """Stream the summatory traces of one family along an N-grid.

    Single pass over n <= max(grid): plain-Mobius prefix sums
    sum mu log^j/n (j<=4), sum mu log^j (j<=4), sum mu log^j/n^2 (j<=4),
    and the unsigned sums log^j/n, log^j/n^2 (j<=3) are enough to emit
    every family's columns by exact recombination at each grid point.
    """
    if kind not in KINDS:
        raise InvalidArgumentError(f"trace_table: unknown kind {kind!r}")
    n_grid = np.asarray(n_grid, dtype=np.int64)
    if n_grid.ndim != 1 or n_grid.size == 0:
        raise InvalidArgumentError("trace_table: grid must be a 1-d "
                                   "non-empty integer array")
    if n_grid[0] < 2:
        raise InvalidArgumentError("trace_table: grid values must be >= 2")
    if np.any(np.diff(n_grid) <= 0):
        raise InvalidArgumentError("trace_table: grid must be strictly "
                                   "increasing")
    if kind == "nu" and abc is None:
        abc = solve_abc()

    n_top = int(n_grid[-1])
    mu_all = mobius_sieve(n_top).mu

    # Prefix accumulators; index = log power j.
    lmu = [Kahan() for _ in range(5)]   # mu log^j n / n
    mmu = [Kahan() for _ in range(5)]   # mu log^j n
    emu = [Kahan() for _ in range(5)]   # mu log^j n / n^2
    pun = [Kahan() for _ in range(4)]   # log^j n / n
    zun = [Kahan() for _ in range(4)]   # log^j n / n^2

    k = len(n_grid)
    out_l = np.empty((k, 4))
    out_m = np.empty((k, 4))

    def emit(i: int, log_n: float) -> None:
        lj = [a.total for a in lmu]
        mj = [a.total for a in mmu]
        if kind == "mobius":
            out_l[i] = lj[:4]
            out_m[i] = mj[:4]
        elif kind == "lambda":
            out_l[i] = [lj[j] - lj[j + 1] / log_n for j in range(4)]
            out_m[i] = [mj[j] - mj[j + 1] / log_n for j in range(4)]
        else:
            a, b, c = abc
            ej = [x.total for x in emu]
            pj = [x.total for x in pun]
            zj = [x.total for x in zun]
            out_l[i] = [lj[j] - (lj[j + 1] + a * ej[j + 1] + b * ej[j]
                                 + c * zj[j]) / log_n
                        for j in range(4)]
            out_m[i] = [mj[j] - (mj[j + 1] + a * lj[j + 1] + b * lj[j]
                                 + c * pj[j]) / log_n
                        for j in range(4)]

    # Segment ends are chunk boundaries plus grid points, so every grid
    # point is emitted from an exact prefix state; no rollback needed.
    gi = 0
    pos = 1
    while pos <= n_top:
        hi = min(pos + _CHUNK - 1, n_top)
        if gi < k and n_grid[gi] <= hi:
            hi = int(n_grid[gi])
        n = np.arange(pos, hi + 1, dtype=np.float64)
        logn = np.log(n)
        muv = mu_all[pos:hi + 1].astype(np.float64)
        inv2 = 1.0 / (n * n)
        for j in range(5):
            # term forms mirror l_term/m_term exactly (same ops, same
            # rounding) so the bookkeeping comparison is float-clean
            lp = logn ** j
            lmu[j].add(_xsum(muv * lp / n))
            mmu[j].add(_xsum(muv * lp))
            emu[j].add(_xsum(muv * lp * inv2))
            if j < 4:
                pun[j].add(_xsum(lp / n))
                zun[j].add(_xsum(lp * inv2))
        if gi < k and int(n_grid[gi]) == hi:
            emit(gi, math.log(hi))
            gi += 1
        pos = hi + 1

    ell = np.asarray(cn.constants().ell)
    logs = np.log(n_grid.astype(np.float64))[:, None]
    out_lbar = out_l + ell[None, :]
    pw = logs ** np.arange(3)[None, :]
    out_ltil = out_lbar[:, :3] / pw
    out_mtil = out_m[:, :3] / pw
    out_dlbar = out_lbar[:, :3] - out_lbar[:, 1:4] / logs
    out_dm = out_m[:, :3] - out_m[:, 1:4] / logs
    return TraceTable(kind=kind, n_grid=n_grid, l=out_l, lbar=out_lbar,
                      m=out_m, ltil=out_ltil, mtil=out_mtil,
                      dlbar=out_dlbar, dm=out_dm, abc=abc)
