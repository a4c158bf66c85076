"""Numerical kernels: adaptive quadrature, bracketed root finding, and the
regularized incomplete beta function.

The beta CDF is implemented here (Lentz continued fraction) instead of pulled
from a special-function library so the numeric core stays self-contained and
portable.  Accuracy is near machine precision for all parameter ranges used
by the package; the test suite cross-checks against an independent reference.
"""

from __future__ import annotations

import math
import os

import numpy as np

DEFAULT_QUAD_TOL = 1e-10
MAX_QUAD_DEPTH = 20  # 2**20 interval cap for the adaptive subdivision

_CF_MAX_ITER = 500
_CF_EPS = 3e-16
_CF_FPMIN = 1e-300


def quad_tol() -> float:
    """Absolute quadrature tolerance, overridable via ``VRP_QUAD_TOL``."""
    raw = os.environ.get("VRP_QUAD_TOL")
    if raw is None:
        return DEFAULT_QUAD_TOL
    tol = float(raw)
    if not 0.0 < tol < 1.0:
        raise ValueError(f"VRP_QUAD_TOL must be in (0, 1), got {raw!r}")
    return tol


def adaptive_simpson(f, a: float, b: float, tol: float | None = None) -> float:
    """Integrate ``f`` over [a, b] by adaptive Simpson subdivision.

    The interval is split while the local Richardson error estimate exceeds
    the (halved per side) tolerance, up to 2**20 subintervals.  Intended for
    smooth bounded integrands; singular densities are integrated elsewhere in
    CDF form precisely so this routine never sees them.
    """
    if tol is None:
        tol = quad_tol()
    if a == b:
        return 0.0
    sign = 1.0
    if a > b:
        a, b = b, a
        sign = -1.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return sign * _simpson_step(f, a, b, fa, fb, m, fm, whole, tol, MAX_QUAD_DEPTH)


def _simpson_step(f, a, b, fa, fb, m, fm, whole, tol, depth):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    err = left + right - whole
    if depth <= 0 or abs(err) <= 15.0 * tol:
        return left + right + err / 15.0
    half = 0.5 * tol
    return _simpson_step(f, a, m, fa, fm, lm, flm, left, half, depth - 1) + _simpson_step(
        f, m, b, fm, fb, rm, frm, right, half, depth - 1
    )


def bisect_root(
    f,
    lo: float,
    hi: float,
    xtol: float = 1e-12,
    *,
    f_lo: float | None = None,
    f_hi: float | None = None,
) -> float:
    """Root of ``f`` on a sign-changing bracket [lo, hi] by bisection."""
    if lo > hi:
        raise ValueError(f"invalid bracket [{lo}, {hi}]")
    a, b = lo, hi
    fa = f(a) if f_lo is None else f_lo
    fb = f(b) if f_hi is None else f_hi
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0.0) == (fb > 0.0):
        raise ValueError(f"no sign change on [{lo}, {hi}]: f={fa}, {fb}")
    while b - a > xtol:
        m = 0.5 * (a + b)
        if m <= a or m >= b:  # bracket narrower than float spacing
            break
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm > 0.0) == (fa > 0.0):
            a, fa = m, fm
        else:
            b, fb = m, fm
    return 0.5 * (a + b)


def log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _betacf_scalar(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_FPMIN:
        d = _CF_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_FPMIN:
            d = _CF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _CF_FPMIN:
            c = _CF_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_FPMIN:
            d = _CF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _CF_FPMIN:
            c = _CF_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction stalled (a={a}, b={b}, x={x})")


def _betacf_array(a: float, b: float, x: np.ndarray) -> np.ndarray:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    np.copyto(d, _CF_FPMIN, where=np.abs(d) < _CF_FPMIN)
    d = 1.0 / d
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        np.copyto(d, _CF_FPMIN, where=np.abs(d) < _CF_FPMIN)
        c = 1.0 + aa / c
        np.copyto(c, _CF_FPMIN, where=np.abs(c) < _CF_FPMIN)
        d = 1.0 / d
        h = np.where(done, h, h * d * c)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        np.copyto(d, _CF_FPMIN, where=np.abs(d) < _CF_FPMIN)
        c = 1.0 + aa / c
        np.copyto(c, _CF_FPMIN, where=np.abs(c) < _CF_FPMIN)
        d = 1.0 / d
        delta = d * c
        h = np.where(done, h, h * delta)
        done |= np.abs(delta - 1.0) < _CF_EPS
        if done.all():
            return h
    raise ArithmeticError(f"incomplete beta continued fraction stalled (a={a}, b={b})")


def _reg_inc_beta_scalar(a: float, b: float, x: float, ln_beta: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    front = math.exp(a * math.log(x) + b * math.log1p(-x) - ln_beta)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf_scalar(a, b, x) / a
    return 1.0 - front * _betacf_scalar(b, a, 1.0 - x) / b


def regularized_incomplete_beta(a: float, b: float, x):
    """Regularized incomplete beta I_x(a, b); accepts a scalar or an array."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError(f"shape parameters must be positive, got a={a}, b={b}")
    ln_b = log_beta(a, b)
    if np.ndim(x) == 0:
        return _reg_inc_beta_scalar(a, b, float(x), ln_b)
    x = np.asarray(x, dtype=float)
    interior = (x > 0.0) & (x < 1.0)
    xs = np.where(interior, x, 0.5)  # neutral value in clamped lanes
    front = np.exp(a * np.log(xs) + b * np.log1p(-xs) - ln_b)
    small = xs < (a + 1.0) / (a + b + 2.0)
    lo = _betacf_array(a, b, np.where(small, xs, 0.25))
    hi = _betacf_array(b, a, np.where(small, 0.25, 1.0 - xs))
    out = np.where(small, front * lo / a, 1.0 - front * hi / b)
    out = np.where(x <= 0.0, 0.0, out)
    out = np.where(x >= 1.0, 1.0, out)
    return out
