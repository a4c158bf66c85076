"""Threshold types that separate own-peak proposers from median proposers.

A proposer whose peak is extreme enough prefers gambling on future winners
from their own side over the sure median.  The lower threshold is the type
below twice-the-median-minus-one that is exactly indifferent between the
lottery of winners above its peak and the median; the upper threshold mirrors
it.  One side is always degenerate: the upper threshold is 1 whenever the
median is at or above 1/2, and the lower one is 0 in the mirrored case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import MedianBranch, TypeDistribution, check_admissibility
from .numerics import adaptive_simpson, bisect_root

ROOT_TOL = 1e-9
MOM_TOL = 1e-9
_BRACKET_PAD = 1e-12


class InadmissibleDistributionError(ValueError):
    """The distribution fails the skewness condition the analysis assumes."""


@dataclass(frozen=True)
class EquilibriumThresholds:
    """Median and the two indifference thresholds for one distribution.

    ``lower_root_found`` / ``upper_root_found`` report whether the threshold
    is an actual root of the indifference equation; when no interior root
    exists the value is the appropriate clamp and the flag is False.
    """

    median: float
    lower: float
    upper: float
    lower_root_found: bool
    upper_root_found: bool


def _weighted_cdf_integral(d: TypeDistribution, theta: float, a: float, b: float) -> float:
    """Integral of (v - theta) * F(v) over [a, b] (bounded, smooth)."""
    return adaptive_simpson(lambda v: (v - theta) * float(d._cdf(np.float64(v))), a, b)


def indifference_gap_low(d: TypeDistribution, theta: float) -> float:
    """Expected-utility surplus of type ``theta`` from winners above its peak.

    Computes int_theta^1 -(v - theta)^2 f(v) dv + (median - theta)^2, i.e.
    the gap between the lottery of final winners in [theta, 1] and the sure
    median.  Positive means the type strictly prefers the lottery.  The
    quadratic-density integral is evaluated after integration by parts so
    unbounded endpoint densities never enter the quadrature.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    med = d.median()
    lottery = -((1.0 - theta) ** 2) + 2.0 * _weighted_cdf_integral(d, theta, theta, 1.0)
    return lottery + (med - theta) ** 2


def indifference_gap_high(d: TypeDistribution, theta: float) -> float:
    """Mirror of :func:`indifference_gap_low` for winners below the peak."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    med = d.median()
    lottery = 2.0 * _weighted_cdf_integral(d, theta, 0.0, theta)
    return lottery + (med - theta) ** 2


def solve_thresholds(d: TypeDistribution, *, enforce_admissible: bool = True) -> EquilibriumThresholds:
    """Locate both thresholds by bisection on the indifference gaps.

    The low gap is monotone decreasing on [0, 2*median - 1], so at most one
    root exists there; symmetrically for the high gap on [2*median, 1].
    Degenerate cases: a gap that never turns positive clamps the threshold to
    its outer bound (0 or 1); a gap that stays positive on the whole interval
    clamps it just inside the inner bound, flagged as not-a-root.
    """
    if enforce_admissible and not check_admissibility(d).admissible:
        raise InadmissibleDistributionError(
            f"{d.spec or type(d).__name__} fails the skewness condition; "
            "pass enforce_admissible=False to compute thresholds anyway"
        )
    med = d.median()

    lower, lower_found = 0.0, False
    hi = 2.0 * med - 1.0
    if hi > 2.0 * _BRACKET_PAD:
        a, b = _BRACKET_PAD, hi - _BRACKET_PAD
        g_a = indifference_gap_low(d, a)
        g_b = indifference_gap_low(d, b)
        if g_a > 0.0 and g_b < 0.0:
            lower = bisect_root(lambda t: indifference_gap_low(d, t), a, b, ROOT_TOL, f_lo=g_a, f_hi=g_b)
            lower_found = True
        elif g_a > 0.0:  # positive throughout: every type below the bound prefers its own peak
            lower = hi - ROOT_TOL

    upper, upper_found = 1.0, False
    lo = 2.0 * med
    if lo < 1.0 - 2.0 * _BRACKET_PAD:
        a, b = lo + _BRACKET_PAD, 1.0 - _BRACKET_PAD
        g_a = indifference_gap_high(d, a)
        g_b = indifference_gap_high(d, b)
        if g_a < 0.0 and g_b > 0.0:
            upper = bisect_root(lambda t: indifference_gap_high(d, t), a, b, ROOT_TOL, f_lo=g_a, f_hi=g_b)
            upper_found = True
        elif g_b > 0.0:  # positive throughout on the interval
            upper = lo + ROOT_TOL

    return EquilibriumThresholds(
        median=med,
        lower=lower,
        upper=upper,
        lower_root_found=lower_found,
        upper_root_found=upper_found,
    )


@dataclass(frozen=True)
class TwoRoundCertificate:
    """Variance condition under which two voting rounds always suffice."""

    branch: MedianBranch
    lhs_variance: float
    rhs: float
    holds: bool


def two_round_condition(d: TypeDistribution) -> TwoRoundCertificate:
    """Check Var >= median^2 - mean^2 (median >= 1/2) or its mirror.

    Holding is equivalent to the matching threshold being degenerate (lower
    threshold 0, respectively upper threshold 1), which is exactly the case
    where every intermediate-round proposer offers the median.
    """
    med = d.median()
    mean, variance = d.moments()
    if med >= 0.5:
        branch = MedianBranch.HIGH
        rhs = med * med - mean * mean
    else:
        branch = MedianBranch.LOW
        rhs = (1.0 - med) ** 2 - (1.0 - mean) ** 2
    return TwoRoundCertificate(
        branch=branch,
        lhs_variance=variance,
        rhs=rhs,
        holds=variance >= rhs - MOM_TOL,
    )
