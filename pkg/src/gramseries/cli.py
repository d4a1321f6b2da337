"""Command-line surface: constants, kernels, series, traces, quadratic
forms, figure data, and the verification suite, emitted as CSV or JSON.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 resource
limit.  Every table is deterministic for a fixed invocation; JSON output is
a field-for-field re-encoding of the CSV rows.
"""

from __future__ import annotations

import argparse
import importlib.resources
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import constants as cn
from . import gram
from . import identities
from . import muntz
from . import quadform
from .arith import coefficients, l_term, m_term, solve_abc, trace_table
from .errors import (DataFormatError, InvalidArgumentError,
                     NumericalError, ResourceLimitError)

DEFAULT_ZEROS = "zeta_zeros_100.txt"


@dataclass
class RunConfig:
    command: str
    tol: float = 1e-8
    n_max: Optional[int] = None
    grid: Optional[str] = None
    output_path: Optional[str] = None
    format: str = "csv"
    zeros_path: Optional[str] = None
    coeffs: str = "mobius"
    q: int = 1
    which: Optional[int] = None
    suite: str = "fast"


def parse_grid(text: str, integers: bool = False) -> np.ndarray:
    """Parse 'a:b:step' (arithmetic) or 'a:b:xfactor' (geometric).

    The geometric form multiplies by the factor until b is passed; b itself
    is always included so stated endpoints appear in the output.
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise InvalidArgumentError(f"grid {text!r}: want a:b:step or a:b:xstep")
    try:
        a, b = float(parts[0]), float(parts[1])
        geometric = parts[2].startswith("x")
        step = float(parts[2][1:] if geometric else parts[2])
    except ValueError as exc:
        raise InvalidArgumentError(f"grid {text!r}: {exc}") from None
    if not (a <= b and step > 0) or (geometric and step <= 1.0):
        raise InvalidArgumentError(f"grid {text!r}: empty or non-advancing")
    vals = []
    x = a
    while x < b * (1.0 + 1e-12):
        vals.append(x)
        x = x * step if geometric else x + step
    if vals and abs(vals[-1] - b) > 1e-9 * max(1.0, abs(b)):
        vals.append(b)
    arr = np.array(vals)
    if integers:
        arr = np.unique(np.rint(arr).astype(np.int64))
    return arr


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def emit(header: Sequence[str], rows: Sequence[Sequence], cfg: RunConfig) -> None:
    if cfg.format == "csv":
        text = ",".join(header) + "\n"
        text += "".join(",".join(_fmt(v) for v in row) + "\n" for row in rows)
    else:
        payload = [dict(zip(header, row)) for row in rows]
        text = json.dumps(payload, indent=1) + "\n"
    if cfg.output_path:
        Path(cfg.output_path).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands

def cmd_constants(cfg: RunConfig) -> int:
    """Constant table with reference values where a printed one exists."""
    c = cn.constants()
    s1_one = muntz.s1_frac(1, 1, 1e-12).value
    s2_one = muntz.s2_frac(1, 1, 1e-12).value
    g1_11 = gram.g1(1.0, 1.0, 1e-12)
    g2_11 = gram.g2(1.0, 1.0, 1e-12)
    a, b, cc = solve_abc()
    rows: List[Tuple] = [
        ("gamma", c.gamma, "", ""),
        ("gamma_1", c.gamma1, "", ""),
        ("K", c.K, "", ""),
        ("K1", c.K1, "", ""),
        ("K2", c.K2, "", ""),
        ("K1_minus_K_minus_half", c.K1 - c.K - 0.5, 0.0,
         c.K1 - c.K - 0.5),
        ("eta_0", c.eta[0], "", ""),
        ("eta_1", c.eta[1], "", ""),
        ("eta_2", c.eta[2], "", ""),
        ("eta_3", c.eta[3], "", ""),
        ("a", a, -2.116586, a - (-2.116586)),
        ("b", b, -0.407487, b - (-0.407487)),
        ("c", cc, 0.312679, cc - 0.312679),
        ("S1(1)", s1_one, 0.130331, s1_one - 0.130331),
        ("S2(1)", s2_one, 0.000643, s2_one - 0.000643),
        ("G1_11", g1_11, 1.260661, g1_11 - 1.260661),
        ("G2_11", g2_11, 3.270465, g2_11 - 3.270465),
    ]
    emit(("name", "computed", "reference", "delta"), rows, cfg)
    return 0


def cmd_kernel(cfg: RunConfig) -> int:
    """Gram matrix entries up to n_max as (m, n, G) rows."""
    n_max = cfg.n_max or 8
    gm = gram.gram_matrix(cfg.q, n_max, cfg.tol)
    rows = [(m, n, gm.entries[m - 1, n - 1])
            for m in range(1, n_max + 1) for n in range(m, n_max + 1)]
    emit(("m", "n", f"G{cfg.q}"), rows, cfg)
    return 0


def cmd_series(cfg: RunConfig) -> int:
    """S_q and R_q along an x grid."""
    xs = parse_grid(cfg.grid or "0.25:4:0.25")
    rows = [(x, muntz.r1(x), muntz.s1(x, cfg.tol).value,
             muntz.r2(x), muntz.s2(x, cfg.tol).value) for x in xs]
    emit(("x", "R1", "S1", "R2", "S2"), rows, cfg)
    return 0


def cmd_traces(cfg: RunConfig) -> int:
    """Full Mertens/Landau trace table for one coefficient kind."""
    grid = parse_grid(cfg.grid or "10000:10000000:500", integers=True)
    table = trace_table(cfg.coeffs, grid)
    text = table.to_csv()
    if cfg.format == "json":
        lines = text.strip().split("\n")
        hdr = lines[0].split(",")
        payload = [dict(zip(hdr, (float(v) for v in ln.split(","))))
                   for ln in lines[1:]]
        text = json.dumps(payload, indent=1) + "\n"
    if cfg.output_path:
        Path(cfg.output_path).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_quadform(cfg: RunConfig) -> int:
    """One distance report row for (kind, q, N)."""
    n = cfg.n_max or 100
    co = coefficients(cfg.coeffs, n)
    rep = quadform.d_squared(co, cfg.q, n, cfg.tol)
    text = rep.CSV_HEADER + "\n" + rep.to_csv_row() + "\n"
    if cfg.format == "json":
        hdr = rep.CSV_HEADER.split(",")
        vals = rep.to_csv_row().split(",")
        payload = [{k: (v if k == "kind" or v == "" else float(v))
                    for k, v in zip(hdr, vals)}]
        text = json.dumps(payload, indent=1) + "\n"
    if cfg.output_path:
        Path(cfg.output_path).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _fig1(cfg: RunConfig) -> int:
    xs = parse_grid(cfg.grid or "0.25:4:0.01")
    rows = [(x, muntz.r1(x), muntz.s1(x, 1e-10).value,
             muntz.r2(x), muntz.s2(x, 1e-10).value) for x in xs]
    emit(("x", "R1", "S1", "R2", "S2"), rows, cfg)
    return 0


def _trace_grid(cfg: RunConfig) -> np.ndarray:
    return parse_grid(cfg.grid or "10000:10000000:500", integers=True)


def _fig2(cfg: RunConfig) -> int:
    t = trace_table("mobius", _trace_grid(cfg))
    rows = [(int(n),) + tuple(t.ltil[i]) + tuple(t.mtil[i])
            for i, n in enumerate(t.n_grid)]
    emit(("N", "Ltil0", "Ltil1", "Ltil2", "Mtil0", "Mtil1", "Mtil2"),
         rows, cfg)
    return 0


def _fig3(cfg: RunConfig) -> int:
    t = trace_table("mobius", _trace_grid(cfg))
    logs = np.log(t.n_grid.astype(np.float64))
    scale = np.stack([np.ones_like(logs), logs, logs ** 2], axis=1)
    dlt = t.dlbar / scale
    dmt = t.dm / scale
    rows = [(int(n),) + tuple(dlt[i]) + tuple(dmt[i])
            for i, n in enumerate(t.n_grid)]
    emit(("N", "dLtil0", "dLtil1", "dLtil2", "dMtil0", "dMtil1", "dMtil2"),
         rows, cfg)
    return 0


def _fig4(cfg: RunConfig) -> int:
    c = cn.constants()
    t = trace_table("nu", _trace_grid(cfg))
    l0, l1, l2 = t.l[:, 0], t.l[:, 1], t.l[:, 2]
    m0, m1, m2 = t.m[:, 0], t.m[:, 1], t.m[:, 2]
    p1 = m0 * (l0 + 0.5 * (l1 + 1.0)) + m1 * l0
    p2 = (m0 * (c.K2 * l0 + c.K1 * (l1 + 1.0) + 0.25 * (2.0 * c.gamma + l2))
          + m1 * (2.0 * c.K1 * l0 + l1 + 1.0) + m2 * l0)
    rows = [(int(n), p1[i], p2[i]) for i, n in enumerate(t.n_grid)]
    emit(("N", "P1_sum", "P2_sum"), rows, cfg)
    return 0


def _fig5(cfg: RunConfig) -> int:
    grid = parse_grid(cfg.grid or "400:4000:100", integers=True)
    if grid[-1] > quadform._DENSE_CAP:
        sys.stderr.write(
            f"warning: figure-5 grid tops out at {grid[-1]}, beyond the "
            f"dense-matrix budget {quadform._DENSE_CAP}; truncating\n")
        grid = grid[grid <= quadform._DENSE_CAP]
    grid_l = [int(n) for n in grid]
    d1 = quadform.d_sweep(1, grid_l)
    d2 = quadform.d_sweep(2, grid_l)
    logs = np.log(grid.astype(np.float64))
    rows = []
    for i, n in enumerate(grid_l):
        rows.append((n,
                     math.sqrt(max(d1["lambda"][i], 0.0) * logs[i]),
                     math.sqrt(max(d1["nu"][i], 0.0) * logs[i]),
                     math.sqrt(max(d2["lambda"][i], 0.0)) * logs[i],
                     math.sqrt(max(d2["nu"][i], 0.0)) * logs[i]))
    emit(("N", "d1_lambda", "d1_nu", "d2_lambda", "d2_nu"), rows, cfg)
    return 0


def cmd_figures(cfg: RunConfig) -> int:
    return {1: _fig1, 2: _fig2, 3: _fig3, 4: _fig4, 5: _fig5}[cfg.which](cfg)


# ---------------------------------------------------------------------------
# verification suite

@dataclass
class _Check:
    name: str
    fun: Callable[[], Tuple[bool, str]]
    fast: bool = True


def _zeros_file(cfg: RunConfig) -> Optional[Path]:
    if cfg.zeros_path:
        return Path(cfg.zeros_path)
    res = importlib.resources.files("gramseries") / "data" / DEFAULT_ZEROS
    with importlib.resources.as_file(res) as p:
        return p if p.exists() else None


def _checks(cfg: RunConfig) -> List[_Check]:
    c = cn.constants()

    def chk_s1_three_ways():
        ref = 0.5 * (c.log_2pi - c.gamma - 1.0)
        ser = muntz.s1_frac(1, 1, 1e-10).value
        integ = muntz.s1_via_phi_integral(1.0, quad_tol=1e-6)
        e1, e2 = abs(ser - ref), abs(integ - ref)
        return e1 < 1e-8 and e2 < 1e-4, f"series {e1:.1e}, integral {e2:.1e}"

    def chk_s2_g2():
        s2 = muntz.s2_frac(1, 1, 1e-10).value
        g2 = gram.g2(1.0, 1.0, 1e-10)
        e1, e2 = abs(s2 - 0.000643), abs(g2 - 3.270465)
        return e1 < 5e-6 and e2 < 1e-5, f"S2(1) {e1:.1e}, G2_11 {e2:.1e}"

    def chk_g1():
        e = abs(gram.g1(1.0, 1.0, 1e-12) - (c.log_2pi - c.gamma))
        return e < 1e-9, f"closed-form delta {e:.1e}"

    def chk_abc():
        a, b, cc = solve_abc()
        ok = (abs(a - (-2.116617835543446)) < 1e-9
              and abs(b - (-0.407487)) < 1e-4
              and abs(cc - 0.312679) < 1e-4)
        return ok, f"a={a:.9f} b={b:.6f} c={cc:.6f}"

    def chk_reciprocity():
        rng = np.random.default_rng(11)
        rs = np.exp(rng.uniform(np.log(0.01), np.log(100.0), 20))
        worst = 0.0
        for q in (1, 2):
            for r in rs:
                rc = muntz.reciprocity_residual(q, float(r), tol=1e-8,
                                                detail=True)
                worst = max(worst, abs(rc.residual) / max(rc.tail_bound, 1e-300))
        return worst <= 2.0, f"worst residual/bound {worst:.3f}"

    def chk_macleod():
        worst = 0.0
        for x in (1.0, 10.0, 100.0, 1e3, 1e4):
            worst = max(worst, abs(identities.macleod_check_1(x).residual))
        r2c = identities.macleod_check_2(1e4)
        ok2 = abs(r2c.residual) <= r2c.slack_budget
        return worst < 1e-8 and ok2, f"rel-1 worst {worst:.1e}"

    def chk_qform_small():
        worst = 0.0
        for q in (1, 2):
            for kind in ("mobius", "lambda", "nu"):
                co = coefficients(kind, 100)
                qd = quadform.q_form_direct(co, q, 100, 1e-10)
                qc = quadform.q_form_decomposed(co, q, 100, 1e-10)
                worst = max(worst, abs(qd - qc) / max(abs(qd), 1e-30))
        return worst < 1e-8, f"worst relative split {worst:.1e}"

    def chk_qform_500():
        worst = 0.0
        for q in (1, 2):
            gm = gram.gram_matrix(q, 500, 1e-10)
            for kind in ("mobius", "lambda", "nu"):
                co = coefficients(kind, 500)
                qd = quadform.q_form_direct(co, q, 500, 1e-10,
                                            entries=gm.entries)
                qc = quadform.q_form_decomposed(co, q, 500, 1e-9)
                worst = max(worst, abs(qd - qc) / max(abs(qd), 1e-30))
        return worst < 1e-8, f"worst relative split {worst:.1e}"

    def chk_fig5_order(n_hi: int):
        def run():
            grid = list(range(400, n_hi + 1, 200))
            ok = True
            for q in (1, 2):
                sw = quadform.d_sweep(q, grid)
                ok = ok and bool(np.all(sw["nu"] <= sw["lambda"]))
            return ok, f"nu <= lambda pointwise to N={n_hi}"
        return run

    def chk_perron():
        path = _zeros_file(cfg)
        if path is None:
            return True, "no zeros file; skipped"
        zd = identities.load_zeros(str(path))
        if zd.count == 0:
            return True, "empty zeros file; Perron comparison skipped"
        n_val = 10 ** 4
        ps = identities.perron_zero_sum(n_val, zd, min(100, zd.count))
        co = coefficients("mobius", n_val)
        lx = math.log(n_val)
        lbar1 = l_term(co, 1, n_val) + 1.0
        lbar2 = l_term(co, 2, n_val) + 2.0 * c.gamma
        target = (lbar1 - lbar2 / lx) * lx
        ratio = ps / target if target != 0 else float("inf")
        return 0.2 <= ratio <= 5.0, f"zero-sum/Mertens-side ratio {ratio:.3f}"

    return [
        _Check("s1_three_ways", chk_s1_three_ways),
        _Check("s2_and_g2_entry", chk_s2_g2),
        _Check("g1_entry", chk_g1),
        _Check("linear_system_abc", chk_abc),
        _Check("reciprocity", chk_reciprocity),
        _Check("macleod_identities", chk_macleod),
        _Check("quadform_split_n100", chk_qform_small),
        _Check("quadform_split_n500", chk_qform_500, fast=False),
        _Check("distance_order_small", chk_fig5_order(800)),
        _Check("distance_order_full", chk_fig5_order(4000), fast=False),
        _Check("perron_zero_sum", chk_perron),
    ]


def cmd_verify(cfg: RunConfig) -> int:
    failures = 0
    for check in _checks(cfg):
        if cfg.suite == "fast" and not check.fast:
            continue
        t0 = time.time()
        try:
            ok, detail = check.fun()
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        status = "PASS" if ok else "FAIL"
        if not ok:
            failures += 1
        sys.stdout.write(
            f"{status}  {check.name:22s} {detail}  [{time.time() - t0:.1f}s]\n")
    sys.stdout.write(f"{'OK' if failures == 0 else 'FAILED'}: "
                     f"{failures} failing check(s)\n")
    return 0 if failures == 0 else 1


# ---------------------------------------------------------------------------
# argument handling

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gramseries",
        description="Gram kernels of the dilated fractional-part system: "
                    "constants, series, traces, quadratic forms, figures.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, grid_default=None):
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--out", dest="output_path")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--grid", default=grid_default,
                       help="a:b:step (arithmetic) or a:b:xF (geometric)")
        p.add_argument("--n-max", dest="n_max", type=int)
        p.add_argument("--coeffs", choices=("mobius", "lambda", "nu"),
                       default="mobius")
        p.add_argument("--q", type=int, choices=(1, 2), default=1)
        p.add_argument("--zeros", dest="zeros_path")

    common(sub.add_parser("constants", help="constant table with references"))
    common(sub.add_parser("kernel", help="Gram matrix entries"))
    common(sub.add_parser("series", help="S_q and R_q along a grid"))
    common(sub.add_parser("traces", help="Mertens/Landau trace table"))
    common(sub.add_parser("quadform", help="one distance report"))
    pf = sub.add_parser("figures", help="figure data tables")
    pf.add_argument("which", type=int, choices=(1, 2, 3, 4, 5))
    common(pf)
    pv = sub.add_parser("verify", help="verification suite")
    pv.add_argument("suite", nargs="?", choices=("fast", "full"),
                    default="fast")
    common(pv)
    return ap


_COMMANDS = {
    "constants": cmd_constants,
    "kernel": cmd_kernel,
    "series": cmd_series,
    "traces": cmd_traces,
    "quadform": cmd_quadform,
    "figures": cmd_figures,
    "verify": cmd_verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = RunConfig(
        command=ns.command,
        tol=ns.tol,
        n_max=ns.n_max,
        grid=ns.grid,
        output_path=ns.output_path,
        format=ns.format,
        zeros_path=ns.zeros_path,
        coeffs=ns.coeffs,
        q=ns.q,
        which=getattr(ns, "which", None),
        suite=getattr(ns, "suite", "fast"),
    )
    if not cfg.tol > 0:
        sys.stderr.write("error: --tol must be positive\n")
        return 2
    try:
        return _COMMANDS[cfg.command](cfg)
    except ResourceLimitError as exc:
        sys.stderr.write(f"resource limit: {exc}\n")
        return 3
    except (InvalidArgumentError, DataFormatError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except NumericalError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
