"""Generate data/zeta_zeros_100.txt from scratch.

Finds the first critical-line zeros as sign changes of the rotated
real-valued combination Z(t) = exp(i theta(t)) zeta(1/2 + it), where
theta(t) = arg Gamma(1/4 + it/2) - (t/2) log pi is the usual phase that
makes Z real on the critical line.  Each bracket is refined by bisection
to ~1e-10, then the ordinate is sanity-checked by |zeta(1/2+it)| being
tiny.  No external zero tables are consulted, so the data file is an
independent product of the zeta evaluator it is later checked against.
"""

import math
import pathlib
import sys

import numpy as np
from scipy.optimize import brentq
from scipy.special import loggamma

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from gramseries.identities import zeta_line  # noqa: E402


def theta(t: float) -> float:
    return float(loggamma(0.25 + 0.5j * t).imag) - 0.5 * t * math.log(math.pi)


def z_func(t: float) -> float:
    s = 0.5 + 1j * t
    return float((np.exp(1j * theta(t)) * zeta_line(s)).real)


def first_zeros(count: int, t_lo: float = 5.0, step: float = 0.02):
    zeros = []
    t = t_lo
    z_prev = z_func(t)
    while len(zeros) < count:
        t_next = t + step
        z_next = z_func(t_next)
        if z_prev == 0.0:
            zeros.append(t)
        elif z_prev * z_next < 0.0:
            zeros.append(brentq(z_func, t, t_next, xtol=1e-11))
        t, z_prev = t_next, z_next
        if t > 1.0e3:
            raise RuntimeError("ran off the search interval")
    return zeros


def main() -> None:
    count = int(sys.argv[1]) if len(sys.argv) > 1 else 100
    zeros = first_zeros(count)
    for t in zeros:
        resid = abs(zeta_line(0.5 + 1j * t))
        if resid > 1e-8:
            raise RuntimeError(f"ordinate {t}: |zeta| = {resid:.2e}, not a zero")
    out = pathlib.Path(__file__).resolve().parents[1] / "src" / "gramseries" / \
        "data" / f"zeta_zeros_{count}.txt"
    out.parent.mkdir(exist_ok=True)
    lines = ["# positive imaginary parts of the first critical-line zeta zeros",
             "# generated by scripts/make_zeros.py (rotated-zeta sign changes,",
             "# bisection to ~1e-10); one ascending ordinate per line"]
    lines += [f"{t:.10f}" for t in zeros]
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {out} ({count} zeros, first = {zeros[0]:.10f})")


if __name__ == "__main__":
    main()
