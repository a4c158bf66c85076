"""Distributions of voter peaks on the unit interval.

Every family exposes the CDF, the density, exact or solver-based quantiles,
and first/second moments.  Supported families: uniform, beta, normal and
logistic conditioned on [0, 1], and a smoothed empirical distribution built
from a sample file.  ``check_admissibility`` evaluates the signed skewness
integral that the equilibrium analysis requires: the mass profile around the
median must lean toward the nearer boundary, which orders mean and median.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path

import numpy as np

from .numerics import adaptive_simpson, bisect_root, log_beta, regularized_incomplete_beta

QUANTILE_XTOL = 1e-13
_INTEGRAL_SNAP_TOL = 1e-9
_SAMPLING_TABLE_SIZE = 32769

_erf_vec = np.vectorize(math.erf, otypes=[float])


class MedianBranch(str, Enum):
    """Which side of 1/2 the median falls on (ties count as low)."""

    LOW = "median_low"
    HIGH = "median_high"


@dataclass(frozen=True)
class AdmissibilityReport:
    median: float
    mean: float
    variance: float
    branch: MedianBranch
    integral_value: float
    admissible: bool


def _validate_unit(x, name: str):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")
    return arr


class TypeDistribution(ABC):
    """A distribution of voter peaks with support exactly [0, 1].

    Instances are immutable after construction; all methods are pure, so a
    single instance can be shared freely across threads.
    """

    #: spec string understood by :func:`parse_distribution`
    spec: str = ""

    @abstractmethod
    def _cdf(self, x: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _pdf(self, x: np.ndarray) -> np.ndarray: ...

    def cdf(self, x):
        """P(peak <= x).  Accepts a scalar or an ndarray in [0, 1]."""
        arr = _validate_unit(x, "x")
        out = self._cdf(arr)
        return float(out) if np.ndim(x) == 0 else out

    def pdf(self, x):
        """Density at ``x``; positive on (0, 1) for every family."""
        arr = _validate_unit(x, "x")
        out = self._pdf(arr)
        return float(out) if np.ndim(x) == 0 else out

    def quantile(self, u: float) -> float:
        """Smallest x with F(x) >= u, solved by bisection unless overridden."""
        u = float(u)
        if not 0.0 <= u <= 1.0:
            raise ValueError(f"quantile level must lie in [0, 1], got {u}")
        if u == 0.0:
            return 0.0
        if u == 1.0:
            return 1.0
        return bisect_root(lambda x: self._cdf(np.float64(x)) - u, 0.0, 1.0, QUANTILE_XTOL, f_lo=-u, f_hi=1.0 - u)

    @cached_property
    def _median(self) -> float:
        return self.quantile(0.5)

    def median(self) -> float:
        return self._median

    @cached_property
    def _moments(self) -> tuple[float, float]:
        # Integration by parts: E[v] = 1 - int F, E[v^2] = 1 - 2 int v F(v) dv.
        # Keeps the integrand bounded even when the density diverges at 0 or 1.
        mean = 1.0 - adaptive_simpson(lambda v: self._cdf(np.float64(v)), 0.0, 1.0)
        second = 1.0 - 2.0 * adaptive_simpson(lambda v: v * self._cdf(np.float64(v)), 0.0, 1.0)
        return mean, second - mean * mean

    def moments(self) -> tuple[float, float]:
        """(mean, variance) of the peak distribution."""
        return self._moments

    @cached_property
    def _sampling_table(self) -> tuple[np.ndarray, np.ndarray]:
        xs = np.linspace(0.0, 1.0, _SAMPLING_TABLE_SIZE)
        us = np.asarray(self._cdf(xs), dtype=float).copy()
        us[0], us[-1] = 0.0, 1.0
        np.maximum.accumulate(us, out=us)  # guard against rounding dips
        return us, xs

    def sample_quantiles(self, u: np.ndarray) -> np.ndarray:
        """Vectorized inverse CDF for Monte Carlo draws.

        Interpolates a dense tabulated quantile and polishes with one Newton
        step clamped to the bracketing table cell.  Families with an exact
        inverse override this.
        """
        us, xs = self._sampling_table
        u = np.asarray(u, dtype=float)
        x0 = np.interp(u, us, xs)
        j = np.clip(np.searchsorted(us, u, side="right") - 1, 0, len(xs) - 2)
        lo, hi = xs[j], xs[j + 1]
        with np.errstate(all="ignore"):
            dens = np.asarray(self._pdf(x0), dtype=float)
            step = (np.asarray(self._cdf(x0), dtype=float) - u) / dens
            polished = np.where(np.isfinite(step), x0 - step, x0)
        return np.clip(polished, lo, hi)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"{type(self).__name__}({self.spec!r})"


class Uniform(TypeDistribution):
    spec = "uniform"

    def _cdf(self, x):
        return x

    def _pdf(self, x):
        return np.ones_like(x)

    def quantile(self, u: float) -> float:
        if not 0.0 <= u <= 1.0:
            raise ValueError(f"quantile level must lie in [0, 1], got {u}")
        return float(u)

    def median(self) -> float:
        return 0.5

    def moments(self) -> tuple[float, float]:
        return 0.5, 1.0 / 12.0

    def sample_quantiles(self, u):
        return np.asarray(u, dtype=float)


class Beta(TypeDistribution):
    """Beta(alpha, beta) on [0, 1]; CDF via the in-house incomplete beta."""

    def __init__(self, alpha: float, beta: float):
        if not (alpha > 0.0 and beta > 0.0 and math.isfinite(alpha) and math.isfinite(beta)):
            raise ValueError(f"beta shape parameters must be positive, got {alpha}, {beta}")
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.spec = f"beta:{alpha:g},{beta:g}"
        self._log_beta = log_beta(self.alpha, self.beta)

    def _cdf(self, x):
        return regularized_incomplete_beta(self.alpha, self.beta, x)

    def _endpoint_density(self, shape: float) -> float:
        # limit of x**(shape-1) as x -> 0, scaled by the normalizer
        if shape < 1.0:
            return math.inf
        if shape > 1.0:
            return 0.0
        return math.exp(-self._log_beta)

    def _pdf(self, x):
        a, b = self.alpha, self.beta
        if np.ndim(x) == 0:
            if x == 0.0:
                return np.float64(self._endpoint_density(a))
            if x == 1.0:
                return np.float64(self._endpoint_density(b))
            return np.exp((a - 1.0) * np.log(x) + (b - 1.0) * np.log1p(-x) - self._log_beta)
        interior = (x > 0.0) & (x < 1.0)
        xs = np.where(interior, x, 0.5)
        out = np.exp((a - 1.0) * np.log(xs) + (b - 1.0) * np.log1p(-xs) - self._log_beta)
        out = np.where(x == 0.0, self._endpoint_density(a), out)
        out = np.where(x == 1.0, self._endpoint_density(b), out)
        return out

    def moments(self) -> tuple[float, float]:
        a, b = self.alpha, self.beta
        mean = a / (a + b)
        var = a * b / ((a + b) ** 2 * (a + b + 1.0))
        return mean, var


class TruncatedNormal(TypeDistribution):
    """Normal(mu, sigma) conditioned on [0, 1] (redraw until inside)."""

    def __init__(self, mu: float, sigma: float):
        if not (sigma > 0.0 and math.isfinite(sigma) and math.isfinite(mu)):
            raise ValueError(f"need finite mu and positive sigma, got {mu}, {sigma}")
        self.mu = float(mu)
        self.sigma = float(sigma)
        self.spec = f"tnormal:{mu:g},{sigma:g}"
        self._g0 = self._parent_cdf(0.0)
        self._mass = self._parent_cdf(1.0) - self._g0
        if self._mass <= 0.0:
            raise ValueError(f"no mass on [0, 1] for mu={mu}, sigma={sigma}")

    def _parent_cdf(self, x):
        z = (x - self.mu) / (self.sigma * math.sqrt(2.0))
        if np.ndim(z) == 0:
            return 0.5 * (1.0 + math.erf(z))
        return 0.5 * (1.0 + _erf_vec(z))

    def _cdf(self, x):
        return (self._parent_cdf(x) - self._g0) / self._mass

    def _pdf(self, x):
        z = (x - self.mu) / self.sigma
        return np.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2.0 * math.pi) * self._mass)


class TruncatedLogistic(TypeDistribution):
    """Logistic(mu, s) conditioned on [0, 1]."""

    def __init__(self, mu: float, s: float):
        if not (s > 0.0 and math.isfinite(s) and math.isfinite(mu)):
            raise ValueError(f"need finite mu and positive scale, got {mu}, {s}")
        self.mu = float(mu)
        self.s = float(s)
        self.spec = f"tlogistic:{mu:g},{s:g}"
        self._g0 = self._parent_cdf(0.0)
        self._mass = self._parent_cdf(1.0) - self._g0

    def _parent_cdf(self, x):
        z = (x - self.mu) / self.s
        return 1.0 / (1.0 + np.exp(-z))

    def _cdf(self, x):
        return (self._parent_cdf(x) - self._g0) / self._mass

    def _pdf(self, x):
        g = self._parent_cdf(x)
        return g * (1.0 - g) / (self.s * self._mass)

    def quantile(self, u: float) -> float:
        if not 0.0 <= u <= 1.0:
            raise ValueError(f"quantile level must lie in [0, 1], got {u}")
        g = self._g0 + u * self._mass
        if g <= 0.0:
            return 0.0
        if g >= 1.0:
            return 1.0
        x = self.mu + self.s * math.log(g / (1.0 - g))
        return min(max(x, 0.0), 1.0)

    def sample_quantiles(self, u):
        u = np.asarray(u, dtype=float)
        g = self._g0 + u * self._mass
        x = self.mu + self.s * (np.log(g) - np.log1p(-g))
        return np.clip(x, 0.0, 1.0)


class Empirical(TypeDistribution):
    """Smoothed empirical distribution of an observed sample.

    The sample CDF is taken piecewise linear through the sorted midpoint
    plotting positions (i - 1/2)/n, pinned to (0, 0) and (1, 1), then mixed
    with the uniform CDF: F = (1 - eps) * F_sample + eps * x.  The mixture
    keeps the density at or above eps everywhere, so medians and quantiles
    are unique even off the sample's convex hull.
    """

    def __init__(self, samples, epsilon: float = 0.01, *, source: str | None = None):
        if not 0.0 < epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
        #: samples clamped into [0, 1] during loading (set by from_file)
        self.clamped_count = 0
        values = np.sort(np.asarray(list(samples), dtype=float))
        if values.size == 0:
            raise ValueError("empirical distribution needs at least one sample")
        if np.any(values < 0.0) or np.any(values > 1.0):
            raise ValueError("samples must be clamped to [0, 1] before construction")
        self.epsilon = float(epsilon)
        self.source = source
        self.spec = f"empirical:{source or '<memory>'},{epsilon:g}"
        n = values.size
        self._kx = np.concatenate(([0.0], values, [1.0]))
        self._kq = np.concatenate(([0.0], (np.arange(1, n + 1) - 0.5) / n, [1.0]))
        widths = np.diff(self._kx)
        rises = np.diff(self._kq)
        with np.errstate(divide="ignore", invalid="ignore"):
            slopes = np.where(widths > 0.0, rises / widths, np.inf)
        self._slopes = slopes
        self._ku = (1.0 - self.epsilon) * self._kq + self.epsilon * self._kx

    @classmethod
    def from_file(cls, path, epsilon: float = 0.01) -> "Empirical":
        samples, clamped = load_empirical_samples(path)
        dist = cls(samples, epsilon, source=str(path))
        dist.clamped_count = clamped
        return dist

    def _cdf(self, x):
        return (1.0 - self.epsilon) * np.interp(x, self._kx, self._kq) + self.epsilon * x

    def _pdf(self, x):
        j = np.clip(np.searchsorted(self._kx, x, side="right") - 1, 0, len(self._slopes) - 1)
        return (1.0 - self.epsilon) * self._slopes[j] + self.epsilon

    def quantile(self, u: float) -> float:
        if not 0.0 <= u <= 1.0:
            raise ValueError(f"quantile level must lie in [0, 1], got {u}")
        return float(np.interp(u, self._ku, self._kx))

    def sample_quantiles(self, u):
        return np.interp(np.asarray(u, dtype=float), self._ku, self._kx)


def load_empirical_samples(path) -> tuple[list[float], int]:
    """Read one value per line, ignoring blanks; clamp strays into [0, 1].

    Returns the clamped samples and how many needed clamping so callers can
    warn about dirty inputs.
    """
    samples: list[float] = []
    clamped = 0
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            value = float(stripped)
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: not a number: {stripped!r}") from exc
        if math.isnan(value):
            raise ValueError(f"{path}:{lineno}: NaN sample")
        if value < 0.0 or value > 1.0:
            clamped += 1
            value = min(max(value, 0.0), 1.0)
        samples.append(value)
    if not samples:
        raise ValueError(f"{path}: no samples found")
    return samples, clamped


def parse_distribution(spec: str) -> TypeDistribution:
    """Build a distribution from a CLI/config spec string.

    Formats: ``uniform``, ``beta:A,B``, ``tnormal:MU,SIGMA``,
    ``tlogistic:MU,S``, ``empirical:PATH[,EPS]``.
    """
    spec = spec.strip()
    name, _, args = spec.partition(":")
    name = name.lower()
    try:
        if name == "uniform":
            if args:
                raise ValueError("uniform takes no parameters")
            return Uniform()
        if name == "beta":
            a, b = _two_floats(args)
            return Beta(a, b)
        if name == "tnormal":
            mu, sigma = _two_floats(args)
            return TruncatedNormal(mu, sigma)
        if name == "tlogistic":
            mu, s = _two_floats(args)
            return TruncatedLogistic(mu, s)
        if name == "empirical":
            if not args:
                raise ValueError("empirical needs a sample file path")
            path, _, tail = args.rpartition(",")
            if path:
                try:
                    eps = float(tail)
                except ValueError:
                    path, eps = args, 0.01
            else:
                path, eps = args, 0.01
            return Empirical.from_file(path, eps)
    except ValueError as exc:
        raise ValueError(f"bad distribution spec {spec!r}: {exc}") from None
    raise ValueError(f"bad distribution spec {spec!r}: unknown family {name!r}")


def _two_floats(args: str) -> tuple[float, float]:
    parts = args.split(",")
    if len(parts) != 2:
        raise ValueError(f"expected two comma-separated parameters, got {args!r}")
    return float(parts[0]), float(parts[1])


def check_admissibility(d: TypeDistribution) -> AdmissibilityReport:
    """Evaluate the signed skewness integral around the median.

    With L the distance from the median to the nearer boundary, the integral
    of 1 - F(median + t) - F(median - t) over [0, L] must be nonnegative when
    the median is at or below 1/2 and nonpositive otherwise.  Values within
    quadrature noise of zero are snapped to zero so symmetric distributions
    report exactly the boundary case.
    """
    med = d.median()
    mean, variance = d.moments()
    branch = MedianBranch.LOW if med <= 0.5 else MedianBranch.HIGH
    limit = med if branch is MedianBranch.LOW else 1.0 - med

    def integrand(t: float) -> float:
        upper = med + t
        lower = med - t
        hi = 1.0 if upper >= 1.0 else float(d._cdf(np.float64(upper)))
        lo = 0.0 if lower <= 0.0 else float(d._cdf(np.float64(lower)))
        return 1.0 - hi - lo

    integral = adaptive_simpson(integrand, 0.0, limit)
    if abs(integral) <= _INTEGRAL_SNAP_TOL:
        integral = 0.0
    admissible = integral >= 0.0 if branch is MedianBranch.LOW else integral <= 0.0
    return AdmissibilityReport(
        median=med,
        mean=mean,
        variance=variance,
        branch=branch,
        integral_value=integral,
        admissible=admissible,
    )
