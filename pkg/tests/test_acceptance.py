"""Acceptance criteria, one test per criterion, one summary line each.

Each test computes its quantities, records a PASS/FAIL line (printed in
the terminal summary), then asserts.  Tolerances are the stated ones;
where a bound is a frozen empirical constant the recorded detail shows
the observed value so drift is visible before it fails.

Set GRAMSERIES_FULL=1 to widen criterion 8 to the full N in [400, 4000]
sweep (the only part whose default is trimmed for runtime).
"""

import functools
import math
import os

import mpmath as mp
import numpy as np
import pytest

from gramseries import arith
from gramseries import constants as cn
from gramseries import gram
from gramseries import identities as idn
from gramseries import muntz
from gramseries import quadform as qf
from gramseries.errors import InvalidArgumentError

mp.mp.dps = 40

C = cn.constants()
FULL = os.environ.get("GRAMSERIES_FULL", "") == "1"

CRITERION_LINES = []


def _record(num: int, label: str, ok: bool, detail: str) -> None:
    word = "PASS" if ok else "FAIL"
    CRITERION_LINES.append(f"{word} criterion {num:>2}: {label} [{detail}]")


def test_criterion_01_s1_at_one_three_ways():
    closed = (C.log_2pi - C.gamma - 1.0) / 2.0
    series = muntz.s1_frac(1, 1, 1e-12).value
    integral = muntz.s1_via_phi_integral(1.0, 1e-6)
    d_series = abs(series - closed)
    d_int = abs(integral - closed)
    d_print = abs(closed - 0.130331)
    ok = d_series < 1e-8 and d_int < 1e-4 and d_print < 1e-6
    _record(1, "S1(1) three ways vs (log 2pi - gamma - 1)/2", ok,
            f"series {d_series:.1e}, integral {d_int:.1e}")
    assert ok


def test_criterion_02_s2_at_one_and_g2_entry():
    series = muntz.s2_frac(1, 1, 1e-12).value
    via_int = muntz.s2_via_s1_integral(1.0, 1e-6)
    ok_s2 = abs(series - 0.000643) < 5e-6 and abs(via_int - 0.000643) < 5e-6
    reps = {
        "closed": gram.g2(1.0, 1.0, 1e-12),
        "sym-weighted": gram.g2_symmetric(1.0, 1.0, 1e-12, "weighted"),
        "sym-equal": gram.g2_symmetric(1.0, 1.0, 1e-12, "equal"),
        "alt": gram.g2_alt(1.0, 1.0, 1e-9),
    }
    quad2d = gram.g2_via_double_integral(1.0, 1.0, 1e-5)
    devs = {k: abs(v - 3.270465) for k, v in reps.items()}
    ok_g2 = max(devs.values()) < 1e-5 and abs(quad2d - 3.270465) < 1e-4
    ok = ok_s2 and ok_g2
    _record(2, "S2(1) two routes; G2_11 four representations", ok,
            f"S2 dev {abs(series - 0.000643):.1e}, "
            f"G2 worst {max(devs.values()):.1e}, 2D {abs(quad2d - 3.270465):.1e}")
    assert ok


def test_criterion_03_g1_entry():
    exact = C.log_2pi - C.gamma
    closed = {
        "closed": gram.g1(1.0, 1.0, 1e-12),
        "sym-weighted": gram.g1_symmetric(1.0, 1.0, 1e-12, "weighted"),
        "sym-equal": gram.g1_symmetric(1.0, 1.0, 1e-12, "equal"),
    }
    worst_closed = max(abs(v - exact) for v in closed.values())
    quad_route = gram.g1_via_autocorr(1, 1, 1e-6)
    vas = gram.autocorr_via_vasyunin(1, 1)  # A(1) feeding the same entry
    quad_dev = abs(quad_route - exact)
    vas_dev = abs(gram.autocorr(1.0, 1e-7) - vas)
    ok = (worst_closed < 1e-9 and quad_dev < 1e-4 and vas_dev < 1e-4
          and abs(exact - 1.260661) < 1e-6)
    _record(3, "G1_11 = log 2pi - gamma", ok,
            f"closed {worst_closed:.1e}, quadrature {quad_dev:.1e}")
    assert ok


def test_criterion_04_linear_system():
    # the printed triple is (-2.116586, -0.407487, 0.312679); b and c
    # reproduce to 1e-5, while an independent 40-digit solve of the same
    # system puts a at -2.11661783554..., 3.2e-5 from the printed value.
    # We therefore hold a to the exact solve (1e-9) and record its
    # distance from the print rather than assert an unreachable 1e-5.
    a, b, c = arith.solve_abc()
    eta = [(-1) ** j * mp.diff(lambda s: 1 / mp.zeta(s), 2, j)
           for j in range(4)]
    z = [mp.zeta(2, derivative=k) for k in range(3)]
    amat = mp.matrix([[eta[1], eta[0], z[0]],
                      [eta[2], eta[1], -z[1]],
                      [eta[3], eta[2], z[2]]])
    rhs = mp.matrix([1, 2 * mp.euler, 6 * (mp.euler ** 2 + mp.stieltjes(1))])
    exact = mp.lu_solve(amat, rhs)
    d_exact = max(abs(a - float(exact[0])), abs(b - float(exact[1])),
                  abs(c - float(exact[2])))
    d_print_bc = max(abs(b - (-0.407487)), abs(c - 0.312679))
    d_print_a = abs(a - (-2.116586))
    ok = d_exact < 1e-9 and d_print_bc < 1e-5 and d_print_a < 5e-5
    _record(4, "nu linear system (a, b, c)", ok,
            f"vs exact solve {d_exact:.1e}, b/c vs print {d_print_bc:.1e}, "
            f"a vs print {d_print_a:.1e}")
    assert ok


def test_criterion_05_reciprocity_bulk():
    rng = np.random.default_rng(20260815)
    rs = np.exp(rng.uniform(math.log(0.01), math.log(100.0), 100))
    worst = 0.0
    for q in (1, 2):
        for r in rs:
            chk = muntz.reciprocity_residual(q, float(r), 1e-8, detail=True)
            worst = max(worst, abs(chk.residual) / max(chk.tail_bound, 1e-300))
    ok = worst <= 2.0
    _record(5, "reciprocity on 100 log-uniform r, q in {1,2}", ok,
            f"worst |residual|/bound {worst:.3f}")
    assert ok


def test_criterion_06_gram_route_agreement():
    g1m = gram.gram_matrix(1, 6, 1e-11).entries
    worst1 = 0.0
    for m in range(1, 7):
        for n in range(1, 7):
            if math.gcd(m, n) != 1:
                continue
            u, v = float(m), float(n)
            vals = (gram.g1(u, v, 1e-11),
                    gram.g1_symmetric(u, v, 1e-11, "weighted"),
                    gram.g1_symmetric(u, v, 1e-11, "equal"),
                    gram.g1_via_autocorr(m, n, 1e-6),
                    g1m[m - 1, n - 1])
            worst1 = max(worst1, max(vals) - min(vals))
    worst2 = 0.0
    for m in (1, 2, 3):
        for n in (1, 2, 3):
            if math.gcd(m, n) != 1:
                continue
            u, v = float(m), float(n)
            vals = (gram.g2(u, v, 1e-11),
                    gram.g2_symmetric(u, v, 1e-11, "weighted"),
                    gram.g2_alt(u, v, 1e-9),
                    gram.g2_via_double_integral(u, v, 1e-5))
            worst2 = max(worst2, max(vals) - min(vals))
    ok = worst1 <= 1e-4 and worst2 <= 1e-4
    _record(6, "Gram five-way (q=1) / four-way (q=2) agreement", ok,
            f"q=1 spread {worst1:.1e}, q=2 spread {worst2:.1e}")
    assert ok


@functools.lru_cache(maxsize=None)
def _qgrid_reports():
    """d^2 reports for kinds x q x N in {1, 10, 100, 500} (nu from 10)."""
    out = {}
    for q in (1, 2):
        entries = gram.gram_matrix(q, 500, 1e-9).entries
        for kind in ("mobius", "lambda", "nu"):
            for n in (1, 10, 100, 500):
                if kind == "nu" and n == 1:
                    continue
                co = arith.coefficients(kind, n)
                out[(kind, q, n)] = qf.d_squared(co, q, n, 1e-9,
                                                 entries=entries[:n, :n])
    return out


def test_criterion_07_quadratic_form_identity():
    reports = _qgrid_reports()
    worst = 0.0
    for rep in reports.values():
        rel = abs(rep.Q_direct - rep.Q_decomposed) / max(1.0, abs(rep.Q_direct))
        worst = max(worst, rel)
    # nu is undefined at N = 1 (its scaling divides by log N); the
    # constructor must refuse rather than emit garbage
    with pytest.raises(InvalidArgumentError):
        arith.coefficients("nu", 1)
    # s_convolved vs brute force at N = 50
    co = arith.coefficients("mobius", 50)
    worst_conv = 0.0
    for q in (1, 2):
        s_fn = muntz.s1_frac if q == 1 else muntz.s2_frac
        for m in range(1, 11):
            brute = math.fsum(co.values[n] * s_fn(n, m, 1e-13).value
                              for n in range(1, 51) if co.values[n] != 0.0)
            worst_conv = max(worst_conv,
                             abs(qf.s_convolved(co, q, m, 1e-11) - brute))
    ok = worst <= 1e-8 and worst_conv <= 1e-9
    _record(7, "Q_direct = Q_decomposed on kinds x q x N grid", ok,
            f"worst rel split {worst:.1e}, brute conv {worst_conv:.1e}; "
            "nu at N=1 refused")
    assert ok


def test_criterion_08_distance_nonnegativity_and_sweep():
    reports = _qgrid_reports()
    worst_resid, min_d2 = 0.0, math.inf
    for rep in reports.values():
        recon = rep.q - 2.0 * rep.mixed + rep.Q_direct
        worst_resid = max(worst_resid, abs(recon - rep.d_squared))
        min_d2 = min(min_d2, rep.d_squared)
    grid = list(range(400, 4001, 400)) if FULL else [400, 800, 1600]
    margins = []
    for q in (1, 2):
        sweep = qf.d_sweep(q, grid)
        margins.append(np.min(sweep["lambda"] - sweep["nu"]))
    ok = (worst_resid < 1e-10 and min_d2 >= 0.0
          and all(m > 0.0 for m in margins))
    _record(8, f"d^2 >= 0, assembly exact, nu <= lambda on N={grid[0]}..{grid[-1]}",
            ok, f"assembly {worst_resid:.1e}, min d^2 {min_d2:.2e}, "
            f"min lambda-nu margin {min(margins):.2e}")
    assert ok


def test_criterion_09_summatory_identities():
    xs = [1.0, 10.0, 100.0, 1e3, 1e4, 1e5]
    worst1 = max(abs(idn.macleod_check_1(x).residual) for x in xs)
    worst2 = 0.0
    for x in xs:
        chk = idn.macleod_check_2(x)
        worst2 = max(worst2, abs(chk.residual) / chk.slack_budget)
    ok = worst1 < 1e-8 and worst2 <= 1.0  # budget already carries 3x margin
    _record(9, "summatory identities on x = 1..1e5", ok,
            f"identity-1 worst {worst1:.1e}, identity-2 worst ratio {worst2:.2f}")
    assert ok


def test_criterion_10_nu_tracks_mobius_differences():
    grid = [10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6]
    tmu = arith.trace_table("mobius", grid)
    tnu = arith.trace_table("nu", grid)
    worst_l, worst_m = 0.0, 0.0
    for i, n in enumerate(grid):
        ln = math.log(n)
        for j in range(3):
            worst_l = max(worst_l,
                          abs(tnu.lbar[i][j] - tmu.dlbar[i][j]) * n / ln ** j)
            worst_m = max(worst_m,
                          abs(tnu.m[i][j] - tmu.dm[i][j]) / ln ** j)
    # frozen bounds: observed maxima 0.070 and 0.64, held with 3x margin
    ok = worst_l <= 0.25 and worst_m <= 2.0
    _record(10, "Lbar_nu ~ dLbar_mu (xN/log^j N), M_nu ~ dM_mu (/log^j N)",
            ok, f"L-scaled worst {worst_l:.3f} <= 0.25, "
            f"M-scaled worst {worst_m:.3f} <= 2.0")
    assert ok


def test_criterion_11_remainder_tail_envelopes():
    rng = np.random.default_rng(7)
    x = np.exp(rng.uniform(math.log(100.0), math.log(1e5), 4000))
    x = np.concatenate([x, np.arange(100, 160) + 0.999,
                        np.arange(100, 160) + 1e-3])
    f = x - np.floor(x)
    d1 = muntz._r1_vec(x) - (cn.bernoulli_poly(2, f) / (2 * x * x)
                             + cn.bernoulli_poly(3, f) / (3 * x ** 3))
    d2 = muntz._r2_vec(x) + cn.bernoulli_poly(4, f) / (24 * x ** 4)
    c1 = float(np.max(np.abs(d1) * x ** 4))
    c2 = float(np.max(np.abs(d2) * x ** 5))
    ok = c1 <= 10.0 and c2 <= 50.0
    _record(11, "R1/R2 Bernoulli-tail envelopes on [100, 1e5]", ok,
            f"fitted C_R1 {c1:.3f} <= 10, C_R2 {c2:.3f} <= 50")
    assert ok


def test_criterion_12_property_suite():
    # symmetry + scale covariance
    worst_sym, worst_cov = 0.0, 0.0
    for fn in (gram.g1, gram.g2):
        for u, v in ((1.0, 2.0), (2.0, 3.0), (1.0, 5.0)):
            worst_sym = max(worst_sym,
                            abs(fn(u, v, 1e-12) - fn(v, u, 1e-12)))
            for c in (2.0, 5.0):
                worst_cov = max(worst_cov,
                                abs(fn(c * u, c * v, 1e-12 / c)
                                    - fn(u, v, 1e-12) / c))
    # PSD within tolerance for n <= 50
    psd_ok = True
    for q in (1, 2):
        gm = gram.gram_matrix(q, 50, 1e-10)
        gm.validate(psd_limit=50)
        w = np.linalg.eigvalsh(gm.entries)
        psd_ok = psd_ok and w[0] > -1e-8 * np.trace(gm.entries)
    # fractional-part log integral
    d_int = abs(muntz.fracpart_log_integral(1e-6)
                - (0.5 * C.log_2pi - 1.0))
    # the peculiar identity: sawtooth and floor integrals coincide
    d_syn = max(abs(muntz.s1_via_phi_integral(r, 1e-6)
                    - muntz.s1_via_floor_integral(r, 1e-6))
                for r in (0.5, 1.0, 2.0))
    # boundary laws: deviations shrink along x = 1e-2, 1e-3, 1e-4
    dev1, dev2 = [], []
    for k in (2, 3, 4):
        x, lx = 10.0 ** -k, k * math.log(10.0)
        dev1.append(abs(x * muntz.s1_frac(1, 10 ** k, 1e-7).value
                        - (0.5 * lx - C.K)))
        dev2.append(abs(x * muntz.s2_frac(1, 10 ** k, 1e-7).value
                        - (-0.25 * lx * lx + C.K1 * lx - C.K2)))
    laws_ok = dev1[0] > dev1[1] > dev1[2] and dev2[0] > dev2[1] > dev2[2]
    ok = (worst_sym < 1e-10 and worst_cov < 1e-10 and psd_ok
          and d_int < 1e-6 and d_syn < 1e-4 and laws_ok)
    _record(12, "properties: symmetry/covariance/PSD/integrals/boundary laws",
            ok, f"sym {worst_sym:.1e}, cov {worst_cov:.1e}, "
            f"integral {d_int:.1e}, identity {d_syn:.1e}, laws shrink {laws_ok}")
    assert ok


def test_criterion_13_limit_properties(zeros_data):
    grid = [10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6, 10 ** 7]
    t = arith.trace_table("mobius", grid)
    shrink = all(
        abs(t.lbar[i + 1][j]) < abs(t.lbar[i][j])
        for j in range(3) for i in range(len(grid) - 1))
    lam = [arith.coefficients("lambda", n) for n in grid]  # one sieve per N
    mixed_ok = True
    for q in (1, 2):
        gaps = [abs(qf.mixed_sum(co, q, co.n_cap) - q) for co in lam]
        mixed_ok = mixed_ok and all(b < a for a, b in zip(gaps, gaps[1:]))
    # contour-shift partial sum against the trace difference at N = 1e4
    n_val = 1.0e4
    i4 = grid.index(10 ** 4)
    target = t.dlbar[i4][1] * math.log(n_val)
    zero_sum = idn.perron_zero_sum(n_val, zeros_data, 100)
    ratio = zero_sum / target
    perron_ok = ratio > 0.0 and 0.2 <= ratio <= 5.0
    ok = shrink and mixed_ok and perron_ok
    _record(13, "limits shrink across decades; zero-sum ratio in [0.2, 5]",
            ok, f"traces shrink {shrink}, mixed shrink {mixed_ok}, "
            f"zero-sum/trace ratio {ratio:.3f}")
    assert ok
