"""Finite-difference derivative oracle: 4th-order central stencils composed
per direction, sharpened by two Richardson extrapolation rounds (h, h/2,
h/4) to 8th order.  Used as the independent numeric path for residual
checks and for the FD-vs-symbolic property suite; an extended-precision
variant takes over when double precision's rounding floor is too high."""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Dict, Sequence, Tuple

import numpy as np

# 4th-order central first-derivative stencil
_OFFS = np.array([-2.0, -1.0, 1.0, 2.0])
_WGTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


def _stencil_axis(points: np.ndarray, weights: np.ndarray, axis_idx: int,
                  h: float) -> Tuple[np.ndarray, np.ndarray]:
    """Expand (points, weights) with one first-derivative application."""
    n = points.shape[0]
    out_pts = np.repeat(points, len(_OFFS), axis=0)
    shift = np.tile(_OFFS * h, n)
    out_pts[:, axis_idx] += shift
    out_w = np.repeat(weights, len(_OFFS)) * np.tile(_WGTS / h, n)
    return out_pts, out_w


def fd_derivative(f: Callable, point: Sequence[float], orders: Sequence[int],
                  h: float = 1.0 / 24.0, richardson: bool = True) -> float:
    """Mixed partial derivative d^{orders} f at `point`.

    f maps arrays (one per coordinate) to an array; orders is one
    non-negative integer per coordinate.  With `richardson`, two rounds of
    extrapolation over (h, h/2, h/4) lift the 4th-order stencil to 8th.
    """

    def estimate(step: float) -> float:
        pts = np.array([list(point)], dtype=float)
        wts = np.array([1.0])
        for axis, k in enumerate(orders):
            for _ in range(k):
                pts, wts = _stencil_axis(pts, wts, axis, step)
        vals = np.asarray(f(*(pts[:, i] for i in range(pts.shape[1]))),
                          dtype=float)
        if vals.ndim == 0:
            vals = np.full(pts.shape[0], float(vals))
        return float(np.dot(wts, vals))

    a = estimate(h)
    if not richardson:
        return a
    b = estimate(h / 2.0)
    c = estimate(h / 4.0)
    ab = (16.0 * b - a) / 15.0
    bc = (16.0 * c - b) / 15.0
    return (64.0 * bc - ab) / 63.0


def fd_jet(f: Callable, point: Sequence[float],
           orders_list: Sequence[Tuple[int, ...]],
           h: float = 1.0 / 32.0) -> Dict[Tuple[int, ...], float]:
    return {tuple(o): fd_derivative(f, point, o, h=h) for o in orders_list}


def fd_derivative_extended(f_scalar: Callable, point: Sequence,
                           orders: Sequence[int],
                           h: Fraction = None, dps: int = 30) -> float:
    """Extended-precision variant of fd_derivative for points where the
    double-precision stencil's rounding floor approaches the tolerance.

    f_scalar must accept mpmath scalars (compile_ratfun backend 'mpmath');
    point coordinates may be exact Fractions.
    """
    import mpmath

    if h is None:
        h = Fraction(1, 40)
    with mpmath.workdps(dps):
        base = [mpmath.mpf(q.numerator) / q.denominator
                if isinstance(q, Fraction) else mpmath.mpf(q) for q in point]
        hh = mpmath.mpf(h.numerator) / h.denominator

        def estimate(step):
            nodes = [(list(base), mpmath.mpf(1))]
            for axis, k in enumerate(orders):
                for _ in range(k):
                    new = []
                    for coords, w in nodes:
                        for off, ww in ((-2, 1), (-1, -8), (1, 8), (2, -1)):
                            c2 = list(coords)
                            c2[axis] = c2[axis] + off * step
                            new.append((c2, w * ww / (12 * step)))
                    nodes = new
            return sum(w * f_scalar(*coords) for coords, w in nodes)

        a = estimate(hh)
        b = estimate(hh / 2)
        c = estimate(hh / 4)
        ab = (16 * b - a) / 15
        bc = (16 * c - b) / 15
        return float((64 * bc - ab) / 63)
