"""Quadratic forms of the Gram matrices: the direct route a^T G a, the
decomposed route through Mertens/Landau sums plus the inversion error
E^(q)(N), and the distance d_q^2 = q - 2<A, chi> + Q.

Brute-force oracles re-derive the small cases term by term from the
series module (no divisor convolution, no shared tails); the two Q
routes must then agree to ~1e-9 relative even where the brute force is
hopeless.  The dense sweep builder is checked entry-wise against the
memoized builder, and the truncated line integral must bracket d^2 from
below with the documented T-doubling behaviour.
"""

import math

import numpy as np
import pytest

from gramseries import arith
from gramseries import constants as cn
from gramseries import gram
from gramseries import muntz
from gramseries import quadform as qf
from gramseries.errors import InvalidArgumentError, ResourceLimitError

C = cn.constants()


def test_f_term_closed_values():
    assert abs(qf.f_term(1, 1) - (C.gamma - 1.0)) < 1e-15
    assert abs(qf.f_term(1, 2) - C.C1) < 1e-15  # C1 = 2 gamma + gamma_1 - 3
    want = (C.gamma - 1.0 - math.log(10.0)) / 10.0
    assert abs(qf.f_term(10, 1) - want) < 1e-15


def test_f_term_guards():
    with pytest.raises(InvalidArgumentError):
        qf.f_term(1, 3)
    with pytest.raises(InvalidArgumentError):
        qf.f_term(0, 1)


def test_mixed_sum_brute():
    co = arith.coefficients("nu", 200)
    for q in (1, 2):
        want = math.fsum(co.values[n] * qf.f_term(n, q)
                         for n in range(1, 201))
        assert abs(qf.mixed_sum(co, q, 200) - want) < 1e-13
    # truncation honors n_sum
    want = math.fsum(co.values[n] * qf.f_term(n, 1) for n in range(1, 51))
    assert abs(qf.mixed_sum(co, 1, 50) - want) < 1e-14


def test_divisor_weights_brute():
    vals = np.concatenate([[0.0], np.arange(1.0, 13.0)])
    w = qf._divisor_weights(vals, 12, 40)
    for j in range(1, 41):
        want = sum(vals[n] for n in range(1, 13) if j % n == 0)
        assert w[j] == want, j


@pytest.mark.parametrize("kind", ["mobius", "nu"])
@pytest.mark.parametrize("q", [1, 2])
def test_s_convolved_matches_brute(kind, q):
    n_cap = 40
    co = arith.coefficients(kind, n_cap)
    s_fn = muntz.s1_frac if q == 1 else muntz.s2_frac
    for m in (1, 2, 3, 5, 8):
        want = math.fsum(
            co.values[n] * s_fn(n, m, 1e-13).value
            for n in range(1, n_cap + 1) if co.values[n] != 0.0)
        got = qf.s_convolved(co, q, m, 1e-11)
        assert abs(got - want) < 1e-10, m


def test_s_convolved_zero_coefficients():
    co = arith.CoefficientVector(kind="mobius", n_cap=4,
                                 values=np.zeros(5), abc=None)
    assert qf.s_convolved(co, 1, 2, 1e-10) == 0.0


def test_s_convolved_term_cap():
    co = arith.coefficients("mobius", 100)
    with pytest.raises(ResourceLimitError):
        qf.s_convolved(co, 1, 100, 1e-30)


@pytest.mark.parametrize("kind,q,n", [("mobius", 1, 60), ("nu", 2, 40)])
def test_e_term_matches_double_loop(kind, q, n):
    co = arith.coefficients(kind, n)
    s_fn = muntz.s1_frac if q == 1 else muntz.s2_frac
    r_fn = muntz.r1 if q == 1 else muntz.r2
    outer = []
    for m in range(1, n + 1):
        am = co.values[m]
        if am == 0.0:
            continue
        inner = math.fsum(
            co.values[k] * s_fn(k, m, 1e-13).value
            for k in range(1, n + 1) if co.values[k] != 0.0)
        outer.append(am / m * (inner - r_fn(1.0 / m)))
    want = math.fsum(outer)
    assert abs(qf.e_term(co, q, n, 1e-11) - want) < 1e-9


def test_e_term_guards():
    co = arith.coefficients("mobius", 50)
    with pytest.raises(InvalidArgumentError):
        qf.e_term(co, 1, 51, 1e-9)
    with pytest.raises(InvalidArgumentError):
        qf.e_term(co, 1, 50, -1e-9)
    with pytest.raises(InvalidArgumentError):
        qf.e_term(co, 3, 50, 1e-9)


@pytest.mark.parametrize("kind", ["mobius", "lambda", "nu"])
@pytest.mark.parametrize("q", [1, 2])
def test_q_form_routes_agree(kind, q):
    n = 80
    co = arith.coefficients(kind, n)
    direct = qf.q_form_direct(co, q, n, 1e-10)
    decomp = qf.q_form_decomposed(co, q, n, 1e-9)
    assert abs(direct - decomp) < 1e-8 * max(1.0, abs(direct)), (kind, q)


def test_q_form_direct_entries_fast_path():
    co = arith.coefficients("lambda", 30)
    gm = gram.gram_matrix(1, 30, 1e-10)
    slow = qf.q_form_direct(co, 1, 30, 1e-10)
    fast = qf.q_form_direct(co, 1, 30, 1e-10, entries=gm.entries)
    assert slow == fast
    with pytest.raises(InvalidArgumentError):
        qf.q_form_direct(co, 1, 30, 1e-10, entries=gm.entries[:10, :10])


def test_p_terms_definitional():
    co = arith.coefficients("nu", 300)
    l = [arith.l_term(co, j, 300) for j in range(3)]
    m = [arith.m_term(co, j, 300) for j in range(3)]
    p0, p1, tot = qf.p_terms(co, 1, 300)
    assert abs(p0 - m[0] * (l[0] + 0.5 * (l[1] + 1.0))) < 1e-12
    assert abs(p1 - m[1] * l[0]) < 1e-12
    assert abs(tot - (p0 + p1)) < 1e-15
    p0, p1, p2, tot = qf.p_terms(co, 2, 300)
    assert abs(p0 - m[0] * (C.K2 * l[0] + C.K1 * (l[1] + 1.0)
                            + 0.25 * (2 * C.gamma + l[2]))) < 1e-12
    assert abs(p1 - m[1] * (2 * C.K1 * l[0] + l[1] + 1.0)) < 1e-12
    assert abs(p2 - m[2] * l[0]) < 1e-12
    assert abs(tot - (p0 + p1 + p2)) < 1e-15


def test_d_squared_report():
    co = arith.coefficients("lambda", 60)
    rep = qf.d_squared(co, 1, 60, 1e-9)
    rep.validate()
    assert rep.kind == "lambda" and rep.N == 60 and rep.q == 1
    assert rep.d_squared >= 0.0
    assert abs(rep.d_squared - (1.0 - 2.0 * rep.mixed + rep.Q_direct)) < 1e-14
    assert abs(rep.Q_direct - rep.Q_decomposed) < 1e-8
    row = rep.to_csv_row().split(",")
    assert len(row) == len(qf.QuadFormReport.CSV_HEADER.split(","))
    assert row[0] == "lambda" and row[10] == ""  # no P2 for q = 1
    assert float(row[3]) == rep.d_squared


def test_d_squared_report_csv_q2():
    co = arith.coefficients("nu", 40)
    rep = qf.d_squared(co, 2, 40, 1e-9)
    row = rep.to_csv_row().split(",")
    assert float(row[10]) == rep.P_terms[2]


def test_report_validate_rejects_mismatch():
    rep = qf.QuadFormReport(q=1, N=10, kind="mobius", Q_direct=1.0,
                            Q_decomposed=1.0, E_term=0.0, mixed=0.0,
                            d_squared=5.0, P_terms=(0.0, 0.0, 0.0))
    with pytest.raises(InvalidArgumentError):
        rep.validate()


@pytest.mark.parametrize("q,tol", [(1, 1e-10), (2, 5e-10)])
def test_gram_dense_matches_memoized(q, tol):
    dense = qf.gram_dense(q, 60, s2_tol=1e-11)
    gm = gram.gram_matrix(q, 60, 1e-11)
    assert dense.shape == (61, 61)
    assert np.max(np.abs(dense[1:, 1:] - gm.entries)) < tol


def test_gram_dense_cap():
    with pytest.raises(ResourceLimitError):
        qf.gram_dense(1, qf._DENSE_CAP + 1)


def test_d_sweep_consistent_with_reports():
    grid = [40, 60]
    out = qf.d_sweep(1, grid, kinds=("lambda", "nu"))
    assert set(out) == {"lambda", "nu"}
    for kind in out:
        assert out[kind].shape == (2,)
        for i, n in enumerate(grid):
            co = arith.coefficients(kind, n)
            rep = qf.d_squared(co, 1, n, 1e-9)
            # both matrix builders carry ~1e-9 budgets of their own
            assert abs(out[kind][i] - rep.d_squared) < 5e-9, (kind, n)
        assert np.all(out[kind] > 0.0)


def test_line_integral_brackets_d2_q1():
    co = arith.coefficients("lambda", 1)
    rep = qf.d_squared(co, 1, 1, 1e-10)
    vals = [qf.d_via_line_integral(co, 1, 1, t_max=t) for t in (50.0, 100.0, 200.0)]
    assert vals[0] < vals[1] < vals[2] <= rep.d_squared * (1.0 + 1e-9)
    assert vals[2] > 0.98 * rep.d_squared


def test_line_integral_converged_q2():
    co = arith.coefficients("lambda", 1)
    rep = qf.d_squared(co, 2, 1, 1e-10)
    got = qf.d_via_line_integral(co, 2, 1, t_max=100.0)
    assert abs(got - rep.d_squared) < 0.01 * rep.d_squared


def test_line_integral_guards():
    co = arith.coefficients("mobius", 10)
    with pytest.raises(InvalidArgumentError):
        qf.d_via_line_integral(co, 3, 10)
    with pytest.raises(InvalidArgumentError):
        qf.d_via_line_integral(co, 1, 11)
    with pytest.raises(InvalidArgumentError):
        qf.d_via_line_integral(co, 1, 10, t_max=2e4)  # beyond zeta table
