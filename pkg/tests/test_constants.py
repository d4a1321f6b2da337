"""Constants layer against independent high-precision oracles.

Everything here has a clean second route: gamma/gamma_1/log(2pi) are
literature values, the zeta derivatives at s=2 and the eta_j moments
come straight out of mpmath, and the summatory helpers (harmonic_sum,
log_sum, log_over_k_sum) reduce to digamma / loggamma / brute sums.
The interesting failure mode is the switch from exact tables to
floor-evaluated asymptotic expansions at EXACT_CUTOFF, so several
oracle points straddle that boundary.
"""

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gramseries import constants as cn

mp.mp.dps = 40


def test_base_constants_match_mpmath():
    assert abs(cn.GAMMA - float(mp.euler)) < 1e-16
    assert abs(cn.GAMMA1 - float(mp.stieltjes(1))) < 1e-16
    assert abs(cn.LOG_2PI - float(mp.log(2 * mp.pi))) < 1e-15
    assert abs(cn.ZETA2 - float(mp.zeta(2))) < 1e-15


def test_derived_constants_identities():
    c = cn.constants()
    # K, K1 are affine in gamma and log 2pi; K1 - K = 1/2 exactly (the
    # CLI prints that difference as its reference-zero row)
    assert abs(c.K - 0.5 * (c.log_2pi - c.gamma + 1.0)) < 1e-15
    assert abs((c.K1 - c.K) - 0.5) < 1e-15
    g, l2p = mp.euler, mp.log(2 * mp.pi)
    k2 = ((1 - g / 2) * l2p + l2p ** 2 / 4 + mp.pi ** 2 / 48
          - g ** 2 / 4 - g - mp.stieltjes(1) + mp.mpf(3) / 2)
    assert abs(c.K2 - float(k2)) < 1e-14
    assert abs(c.C1 - (2 * c.gamma + c.gamma1 - 3)) < 1e-15
    assert abs(c.C2 - (0.5 * c.log_2pi + 1.0)) < 1e-15
    # moment targets ell_j
    assert c.ell[0] == 0.0 and c.ell[1] == 1.0
    assert abs(c.ell[2] - 2 * c.gamma) < 1e-15
    assert abs(c.ell[3] - 6 * (c.gamma ** 2 + c.gamma1)) < 1e-15


def test_zeta_derivatives_at_2_vs_mpmath():
    z0, z1, z2, z3 = cn.zeta_derivatives_at_2()
    for k, got in enumerate((z0, z1, z2, z3)):
        want = float(mp.zeta(2, derivative=k))
        assert abs(got - want) < 1e-12 * max(1.0, abs(want)), (k, got, want)


def test_eta_constants_vs_mpmath():
    # eta_j = sum mu(n) log^j n / n^2 = (-1)^j (d/ds)^j [1/zeta](2)
    eta = cn.eta_constants()
    for j in range(4):
        want = float((-1) ** j * mp.diff(lambda s: 1 / mp.zeta(s), 2, j))
        assert abs(eta[j] - want) < 1e-11 * max(1.0, abs(want)), (j, eta[j], want)


@pytest.mark.parametrize("j", [2, 3, 4, 5, 6])
def test_bernoulli_poly_vs_mpmath(j):
    for t in (0.0, 0.17, 0.5, 0.83, 1.0):
        want = float(mp.bernpoly(j, t))
        assert abs(cn.bernoulli_poly(j, t) - want) < 1e-14


def test_bernoulli_poly_rejects_unsupported_degree():
    with pytest.raises(ValueError):
        cn.bernoulli_poly(1, 0.5)
    with pytest.raises(ValueError):
        cn.bernoulli_poly(7, 0.5)


@settings(max_examples=60, deadline=None)
@given(j=st.integers(min_value=2, max_value=6),
       t=st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
def test_bernoulli_poly_forward_difference(j, t):
    # B_j(t+1) - B_j(t) = j t^(j-1)
    lhs = float(mp.bernpoly(j, t + 1)) - cn.bernoulli_poly(j, t)
    assert abs(lhs - j * t ** (j - 1)) < 1e-12


def test_bernoulli_poly_accepts_arrays():
    t = np.linspace(0.0, 1.0, 11)
    vals = cn.bernoulli_poly(2, t)
    assert np.allclose(vals, t * t - t + 1.0 / 6.0, atol=1e-15)


# straddle EXACT_CUTOFF = 10^4 on purpose
_ORACLE_X = (1.0, 2.5, 99.9, 9999.5, 10000.5, 54321.0, 123456.789)


@pytest.mark.parametrize("x", _ORACLE_X)
def test_harmonic_sum_is_digamma(x):
    n = math.floor(x)
    want = float(mp.digamma(n + 1) + mp.euler)
    assert abs(cn.harmonic_sum(x) - want) < 1e-12


@pytest.mark.parametrize("x", _ORACLE_X)
def test_log_sum_is_log_factorial(x):
    n = math.floor(x)
    want = float(mp.loggamma(n + 1))
    assert abs(cn.log_sum(x) - want) < 1e-10 * max(1.0, abs(want))


@pytest.mark.parametrize("x", (1.0, 7.3, 100.0, 9999.5, 10321.0))
def test_log_over_k_sum_brute(x):
    n = math.floor(x)
    want = float(mp.fsum(mp.log(k) / k for k in range(1, n + 1)))
    assert abs(cn.log_over_k_sum(x) - want) < 1e-11 * max(1.0, abs(want))


def test_summatory_helpers_continuous_at_cutoff():
    # the table branch and the expansion branch must agree where they meet
    lo, hi = float(cn.EXACT_CUTOFF) - 0.25, float(cn.EXACT_CUTOFF) + 0.25
    for fn, step in ((cn.harmonic_sum, 1.0 / cn.EXACT_CUTOFF),
                     (cn.log_sum, math.log(cn.EXACT_CUTOFF + 1)),
                     (cn.log_over_k_sum, math.log(cn.EXACT_CUTOFF) / cn.EXACT_CUTOFF)):
        jump = fn(hi) - fn(lo)
        # exactly one new summand enters between lo and hi
        assert abs(jump) <= 1.5 * abs(step) + 1e-12


def test_harmonic_table_prefix():
    h = cn.harmonic_table()
    assert h[0] == 0.0
    assert abs(h[5] - (1 + 0.5 + 1 / 3 + 0.25 + 0.2)) < 1e-15


def test_clear_caches_keeps_values():
    before = cn.constants().K2
    cn.clear_caches()
    assert cn.constants().K2 == before
