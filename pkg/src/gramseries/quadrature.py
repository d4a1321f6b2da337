"""Adaptive Gauss-Legendre quadrature with breakpoint splitting.

The integrands in this package are piecewise smooth: fractional parts and
floors introduce jump discontinuities or kinks at an enumerable set of
points.  Panels are therefore seeded at every supplied breakpoint and then
refined adaptively, comparing an n-point rule against a 2n-point rule on
each panel.  All panels pending at a given refinement level are evaluated
in one batched call, so integrands only ever see large node arrays.
"""

from __future__ import annotations

import functools

import numpy as np

from .errors import ResourceLimitError


@functools.lru_cache(maxsize=None)
def _rule(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def integrate(f, a: float, b: float, tol: float, breakpoints=None,
              order: int = 8, max_panels: int = 200_000):
    """Integral of f over [a, b] to absolute tolerance ~tol.

    f must accept an ndarray and return an ndarray.  breakpoints inside
    (a, b) seed the initial panel edges.  Returns (value, err_estimate).
    Raises ResourceLimitError when refinement would exceed max_panels.
    """
    if b <= a:
        return 0.0, 0.0
    edges = [a, b]
    if breakpoints is not None:
        pts = np.asarray(breakpoints, dtype=np.float64)
        pts = pts[(pts > a) & (pts < b)]
        if pts.size:
            edges = np.concatenate(([a], np.unique(pts), [b]))
    edges = np.asarray(edges, dtype=np.float64)
    lo = edges[:-1].copy()
    hi = edges[1:].copy()
    keep = hi > lo  # collapse zero-length panels from duplicate breakpoints
    lo, hi = lo[keep], hi[keep]

    xs_c, ws_c = _rule(order)
    xs_f, ws_f = _rule(2 * order)
    span = b - a
    total = 0.0
    err_total = 0.0
    n_done = 0

    while lo.size:
        if n_done + lo.size > max_panels:
            raise ResourceLimitError(
                f"quadrature needs more than {max_panels} panels for tol={tol}")
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        # batched evaluation: coarse and fine rules over every pending panel
        nodes_c = mid[:, None] + half[:, None] * xs_c[None, :]
        nodes_f = mid[:, None] + half[:, None] * xs_f[None, :]
        fc = f(nodes_c.ravel()).reshape(nodes_c.shape)
        ff = f(nodes_f.ravel()).reshape(nodes_f.shape)
        ic = half * (fc @ ws_c)
        if_ = half * (ff @ ws_f)
        err = np.abs(if_ - ic)
        budget = tol * (hi - lo) / span
        ok = err <= np.maximum(budget, 1e-17)
        total += float(np.sum(if_[ok]))
        err_total += float(np.sum(err[ok]))
        n_done += int(np.count_nonzero(ok))
        bad = ~ok
        lo_b, hi_b, mid_b = lo[bad], hi[bad], mid[bad]
        lo = np.concatenate([lo_b, mid_b])
        hi = np.concatenate([mid_b, hi_b])
    return total, err_total


def unit_square(f, tol: float, order: int = 10, max_cells: int = 40_000):
    """Adaptive tensor Gauss-Legendre integral of f(x, y) over [0,1]^2.

    f takes two equally shaped ndarrays.  Returns (value, err_estimate).
    """
    xs_c, ws_c = _rule(order)
    xs_f, ws_f = _rule(2 * order)

    def cell_vals(cx, cy, hx, hy, xs, ws):
        # tensor rule on each cell of the batch
        nx = cx[:, None] + hx[:, None] * xs[None, :]
        ny = cy[:, None] + hy[:, None] * xs[None, :]
        npts = xs.size
        xx = np.repeat(nx[:, :, None], npts, axis=2)
        yy = np.repeat(ny[:, None, :], npts, axis=1)
        vals = f(xx.ravel(), yy.ravel()).reshape(xx.shape)
        return (hx * hy) * np.einsum("i,j,cij->c", ws, ws, vals)

    cl = np.array([0.0])
    cb = np.array([0.0])
    cr = np.array([1.0])
    ct = np.array([1.0])
    total = 0.0
    err_total = 0.0
    n_done = 0
    while cl.size:
        if n_done + cl.size > max_cells:
            raise ResourceLimitError(
                f"2-d quadrature needs more than {max_cells} cells for tol={tol}")
        cx = 0.5 * (cl + cr)
        cy = 0.5 * (cb + ct)
        hx = 0.5 * (cr - cl)
        hy = 0.5 * (ct - cb)
        ic = cell_vals(cx, cy, hx, hy, xs_c, ws_c)
        if_ = cell_vals(cx, cy, hx, hy, xs_f, ws_f)
        err = np.abs(if_ - ic)
        budget = tol * (4.0 * hx * hy)  # area share of the unit square
        ok = err <= np.maximum(budget, 1e-17)
        total += float(np.sum(if_[ok]))
        err_total += float(np.sum(err[ok]))
        n_done += int(np.count_nonzero(ok))
        bad = ~ok
        # split each rejected cell into four
        l, r, bo, t = cl[bad], cr[bad], cb[bad], ct[bad]
        mx = 0.5 * (l + r)
        my = 0.5 * (bo + t)
        cl = np.concatenate([l, mx, l, mx])
        cr = np.concatenate([mx, r, mx, r])
        cb = np.concatenate([bo, bo, my, my])
        ct = np.concatenate([my, my, t, t])
    return total, err_total
