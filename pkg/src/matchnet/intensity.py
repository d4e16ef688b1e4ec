"""Catalog of search-intensity distributions.

Seven families cover every distribution the matching formulas are
evaluated on: degenerate, exponential, gamma, Pareto, uniform, two-point
mixtures, and arbitrary integer-supported pmfs (used for vacancies per
location). Operations are free functions dispatching on the family, so
the closed-form case analysis reads in one place per operation.

Families are immutable; sampling takes an explicit numpy Generator so
parallel callers own disjoint streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special, stats

from matchnet.discrete import DiscretePMF
from matchnet.errors import ConstructionError, DomainError, NumericError

_QUAD_EPSREL = 1e-10
_QUAD_EPSABS = 1e-13

# Below s*(b-a) = 1e-8 the uniform mgf ratio loses ~8 digits to
# cancellation; a 4-term series is exact to machine precision there.
_UNIFORM_SERIES_CUTOFF = 1e-8


@dataclass(frozen=True)
class Degenerate:
    value: float

    def __post_init__(self):
        if self.value < 0 or not math.isfinite(self.value):
            raise DomainError("degenerate value must be finite and non-negative")


@dataclass(frozen=True)
class Exponential:
    mean: float

    def __post_init__(self):
        if self.mean <= 0 or not math.isfinite(self.mean):
            raise DomainError("exponential mean must be finite and positive")


@dataclass(frozen=True)
class Gamma:
    shape: float
    mean: float

    def __post_init__(self):
        if self.shape <= 0 or not math.isfinite(self.shape):
            raise DomainError("gamma shape must be finite and positive")
        if self.mean <= 0 or not math.isfinite(self.mean):
            raise DomainError("gamma mean must be finite and positive")

    @property
    def scale(self) -> float:
        return self.mean / self.shape


@dataclass(frozen=True)
class Pareto:
    x_m: float
    alpha: float

    def __post_init__(self):
        if self.x_m <= 0 or not math.isfinite(self.x_m):
            raise DomainError("Pareto scale x_m must be finite and positive")
        # alpha > 1 keeps the mean finite, which every consumer requires.
        if self.alpha <= 1 or not math.isfinite(self.alpha):
            raise DomainError("Pareto shape alpha must exceed 1 for a finite mean")


@dataclass(frozen=True)
class Uniform:
    a: float
    b: float

    def __post_init__(self):
        if not (0 <= self.a < self.b) or not math.isfinite(self.b):
            raise DomainError("uniform support requires 0 <= a < b < inf")


@dataclass(frozen=True)
class TwoPointMixture:
    values: tuple[float, float]
    weights: tuple[float, float]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)
        if len(values) != 2 or len(weights) != 2:
            raise DomainError("two-point mixture needs exactly two atoms")
        if any(v < 0 or not math.isfinite(v) for v in values):
            raise DomainError("mixture atoms must be finite and non-negative")
        if any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-12:
            raise DomainError("mixture weights must be non-negative and sum to 1")
        if values[0] >= values[1]:
            raise DomainError("mixture atoms must be strictly increasing")


@dataclass(frozen=True)
class IntegerDist:
    """Arbitrary distribution on {0, 1, 2, ...} given by a DiscretePMF."""

    pmf: DiscretePMF

    def __post_init__(self):
        if self.pmf.truncation_mass > 1e-6:
            raise DomainError("integer-supported model carries too much dropped tail")


IntensityModel = (
    Degenerate | Exponential | Gamma | Pareto | Uniform | TwoPointMixture | IntegerDist
)

_FAMILY_NAMES = {
    Degenerate: "degenerate",
    Exponential: "exponential",
    Gamma: "gamma",
    Pareto: "pareto",
    Uniform: "uniform",
    TwoPointMixture: "two_point",
    IntegerDist: "integer",
}


# ---------------------------------------------------------------------------
# Moments


def mean(model: IntensityModel) -> float:
    if isinstance(model, Degenerate):
        return model.value
    if isinstance(model, Exponential):
        return model.mean
    if isinstance(model, Gamma):
        return model.mean
    if isinstance(model, Pareto):
        return model.x_m / (1.0 - 1.0 / model.alpha)
    if isinstance(model, Uniform):
        return 0.5 * (model.a + model.b)
    if isinstance(model, TwoPointMixture):
        return model.weights[0] * model.values[0] + model.weights[1] * model.values[1]
    if isinstance(model, IntegerDist):
        return model.pmf.mean()
    raise DomainError(f"unknown model {model!r}")


def variance(model: IntensityModel) -> float:
    """Variance; math.inf when the second moment does not exist."""
    if isinstance(model, Degenerate):
        return 0.0
    if isinstance(model, Exponential):
        return model.mean**2
    if isinstance(model, Gamma):
        return model.mean**2 / model.shape
    if isinstance(model, Pareto):
        if model.alpha <= 2:
            return math.inf
        a = model.alpha
        return model.x_m**2 * a / ((a - 1) ** 2 * (a - 2))
    if isinstance(model, Uniform):
        return (model.b - model.a) ** 2 / 12.0
    if isinstance(model, TwoPointMixture):
        m = mean(model)
        return sum(w * (v - m) ** 2 for v, w in zip(model.values, model.weights))
    if isinstance(model, IntegerDist):
        return model.pmf.variance()
    raise DomainError(f"unknown model {model!r}")


def raw_moment(model: IntensityModel, n: int) -> float:
    """E[X^n]; math.inf when the moment does not exist."""
    if n < 0 or int(n) != n:
        raise DomainError("moment order must be a non-negative integer")
    n = int(n)
    if n == 0:
        return 1.0
    if isinstance(model, Degenerate):
        return model.value**n
    if isinstance(model, Exponential):
        return math.factorial(n) * model.mean**n
    if isinstance(model, Gamma):
        out = model.scale**n
        for i in range(n):
            out *= model.shape + i
        return out
    if isinstance(model, Pareto):
        if model.alpha <= n:
            return math.inf
        return model.alpha * model.x_m**n / (model.alpha - n)
    if isinstance(model, Uniform):
        a, b = model.a, model.b
        return (b ** (n + 1) - a ** (n + 1)) / ((n + 1) * (b - a))
    if isinstance(model, TwoPointMixture):
        return sum(w * v**n for v, w in zip(model.values, model.weights))
    if isinstance(model, IntegerDist):
        k = np.arange(len(model.pmf), dtype=float)
        return float(np.dot(model.pmf.probs, k**n))
    raise DomainError(f"unknown model {model!r}")


def central_moment(model: IntensityModel, n: int) -> float:
    """E[(X - E X)^n]; math.inf when the moment does not exist."""
    if n < 0 or int(n) != n:
        raise DomainError("moment order must be a non-negative integer")
    n = int(n)
    if n == 0:
        return 1.0
    if n == 1:
        return 0.0
    if isinstance(model, Degenerate):
        return 0.0
    m = mean(model)
    if isinstance(model, TwoPointMixture):
        return sum(w * (v - m) ** n for v, w in zip(model.values, model.weights))
    if isinstance(model, IntegerDist):
        k = np.arange(len(model.pmf), dtype=float)
        return float(np.dot(model.pmf.probs, (k - m) ** n))
    if raw_moment(model, n) == math.inf:
        return math.inf
    terms = [
        math.comb(n, j) * raw_moment(model, j) * (-m) ** (n - j) for j in range(n + 1)
    ]
    return math.fsum(terms)


# ---------------------------------------------------------------------------
# Moment-generating function at non-positive arguments


def mgf_neg(model: IntensityModel, s: float) -> float:
    """E[e^{-sX}] for s >= 0. Always in (0, 1]."""
    if s < 0 or not math.isfinite(s):
        raise DomainError("mgf_neg requires a finite s >= 0")
    if s == 0.0:
        return 1.0
    if isinstance(model, Degenerate):
        return math.exp(-s * model.value)
    if isinstance(model, Exponential):
        return 1.0 / (1.0 + s * model.mean)
    if isinstance(model, Gamma):
        return (1.0 + s * model.scale) ** (-model.shape)
    if isinstance(model, Pareto):
        return _pareto_mgf_neg(model, s)
    if isinstance(model, Uniform):
        return _uniform_mgf_neg(model, s)
    if isinstance(model, TwoPointMixture):
        return sum(w * math.exp(-s * v) for v, w in zip(model.values, model.weights))
    if isinstance(model, IntegerDist):
        k = np.arange(len(model.pmf), dtype=float)
        return float(np.dot(model.pmf.probs, np.exp(-s * k)))
    raise DomainError(f"unknown model {model!r}")


def _uniform_mgf_neg(model: Uniform, s: float) -> float:
    a, b = model.a, model.b
    width = b - a
    if s * width < _UNIFORM_SERIES_CUTOFF:
        # 4-term expansion of (e^{-as} - e^{-bs}) / (s (b - a)).
        m1 = 0.5 * (a + b)
        m2 = (a * a + a * b + b * b) / 3.0
        m3 = (a + b) * (a * a + b * b) / 4.0
        return 1.0 - s * m1 + s * s * m2 / 2.0 - s**3 * m3 / 6.0
    return (math.exp(-a * s) - math.exp(-b * s)) / (s * width)


def _pareto_mgf_neg(model: Pareto, s: float) -> float:
    # No elementary closed form; integrate alpha * u^{-alpha-1} e^{-s x_m u}
    # over u >= 1. The integrand is monotone decreasing, no split needed.
    alpha, x_m = model.alpha, model.x_m

    def integrand(u):
        return alpha * u ** (-alpha - 1.0) * math.exp(-s * x_m * u)

    result = integrate.quad(
        integrand, 1.0, np.inf, epsrel=_QUAD_EPSREL, epsabs=_QUAD_EPSABS,
        limit=200, full_output=True,
    )
    if len(result) > 3:
        raise NumericError(
            f"Pareto mgf quadrature failed at s={s}: {result[3]}",
            achieved_tol=result[1],
        )
    return min(1.0, float(result[0]))


# ---------------------------------------------------------------------------
# CDF, integrated CDF, quantile, sampling, pdf


def cdf(model: IntensityModel, x: float) -> float:
    if isinstance(model, Degenerate):
        return 1.0 if x >= model.value else 0.0
    if x <= 0:
        return 0.0
    if isinstance(model, Exponential):
        return -math.expm1(-x / model.mean)
    if isinstance(model, Gamma):
        return float(special.gammainc(model.shape, x / model.scale))
    if isinstance(model, Pareto):
        if x < model.x_m:
            return 0.0
        return 1.0 - (model.x_m / x) ** model.alpha
    if isinstance(model, Uniform):
        if x <= model.a:
            return 0.0
        if x >= model.b:
            return 1.0
        return (x - model.a) / (model.b - model.a)
    if isinstance(model, TwoPointMixture):
        return sum(w for v, w in zip(model.values, model.weights) if v <= x)
    if isinstance(model, IntegerDist):
        k = int(math.floor(x))
        if k < 0:
            return 0.0
        return float(model.pmf.probs[: k + 1].sum())
    raise DomainError(f"unknown model {model!r}")


def cdf_integral(model: IntensityModel, x: float) -> float:
    """Closed-form integral of the CDF from 0 to x.

    Exact for every family, including step CDFs, so second-order dominance
    checks carry no quadrature error.
    """
    if x <= 0:
        return 0.0
    if isinstance(model, Degenerate):
        return max(0.0, x - model.value)
    if isinstance(model, Exponential):
        m = model.mean
        return x - m * (-math.expm1(-x / m))
    if isinstance(model, Gamma):
        # int_0^x F = x F_k(x) - mean * F_{k+1}(x), both regularized gammas.
        k, scale = model.shape, model.scale
        return x * float(special.gammainc(k, x / scale)) - model.mean * float(
            special.gammainc(k + 1, x / scale)
        )
    if isinstance(model, Pareto):
        if x <= model.x_m:
            return 0.0
        a, x_m = model.alpha, model.x_m
        return (x - x_m) - (x_m**a / (1.0 - a)) * (x ** (1.0 - a) - x_m ** (1.0 - a))
    if isinstance(model, Uniform):
        a, b = model.a, model.b
        if x <= a:
            return 0.0
        if x >= b:
            return 0.5 * (b - a) + (x - b)
        return 0.5 * (x - a) ** 2 / (b - a)
    if isinstance(model, TwoPointMixture):
        return sum(w * max(0.0, x - v) for v, w in zip(model.values, model.weights))
    if isinstance(model, IntegerDist):
        k = np.arange(len(model.pmf), dtype=float)
        return float(np.dot(model.pmf.probs, np.maximum(0.0, x - k)))
    raise DomainError(f"unknown model {model!r}")


def quantile(model: IntensityModel, u: float) -> float:
    if not 0.0 <= u < 1.0:
        raise DomainError("quantile level must lie in [0, 1)")
    if isinstance(model, Degenerate):
        return model.value
    if isinstance(model, Exponential):
        return -model.mean * math.log1p(-u)
    if isinstance(model, Gamma):
        return float(stats.gamma.ppf(u, model.shape, scale=model.scale))
    if isinstance(model, Pareto):
        return model.x_m * (1.0 - u) ** (-1.0 / model.alpha)
    if isinstance(model, Uniform):
        return model.a + u * (model.b - model.a)
    if isinstance(model, TwoPointMixture):
        return model.values[0] if u < model.weights[0] else model.values[1]
    if isinstance(model, IntegerDist):
        cum = np.cumsum(model.pmf.probs)
        return float(np.searchsorted(cum, u, side="right"))
    raise DomainError(f"unknown model {model!r}")


def sample(model: IntensityModel, rng: np.random.Generator, size: int | None = None):
    """Inverse-transform draws using the caller's generator."""
    if size is None:
        return quantile(model, float(rng.random()))
    u = rng.random(size)
    if isinstance(model, Degenerate):
        return np.full(size, model.value)
    if isinstance(model, Exponential):
        return -model.mean * np.log1p(-u)
    if isinstance(model, Gamma):
        return stats.gamma.ppf(u, model.shape, scale=model.scale)
    if isinstance(model, Pareto):
        return model.x_m * (1.0 - u) ** (-1.0 / model.alpha)
    if isinstance(model, Uniform):
        return model.a + u * (model.b - model.a)
    if isinstance(model, TwoPointMixture):
        return np.where(u < model.weights[0], model.values[0], model.values[1])
    if isinstance(model, IntegerDist):
        cum = np.cumsum(model.pmf.probs)
        return np.searchsorted(cum, u, side="right").astype(float)
    raise DomainError(f"unknown model {model!r}")


def pdf(model: IntensityModel, x: float) -> float:
    """Density for the continuous families."""
    if isinstance(model, Exponential):
        return math.exp(-x / model.mean) / model.mean if x >= 0 else 0.0
    if isinstance(model, Gamma):
        return float(stats.gamma.pdf(x, model.shape, scale=model.scale))
    if isinstance(model, Pareto):
        if x < model.x_m:
            return 0.0
        return model.alpha * model.x_m**model.alpha * x ** (-model.alpha - 1.0)
    if isinstance(model, Uniform):
        return 1.0 / (model.b - model.a) if model.a <= x <= model.b else 0.0
    raise DomainError(f"{family_name(model)} has no density")


def support(model: IntensityModel) -> tuple[float, float]:
    if isinstance(model, Degenerate):
        return model.value, model.value
    if isinstance(model, (Exponential, Gamma)):
        return 0.0, math.inf
    if isinstance(model, Pareto):
        return model.x_m, math.inf
    if isinstance(model, Uniform):
        return model.a, model.b
    if isinstance(model, TwoPointMixture):
        return model.values[0], model.values[1]
    if isinstance(model, IntegerDist):
        return 0.0, float(len(model.pmf) - 1)
    raise DomainError(f"unknown model {model!r}")


def point_masses(model: IntensityModel):
    """(values, weights) for purely atomic models, else None."""
    if isinstance(model, Degenerate):
        return (model.value,), (1.0,)
    if isinstance(model, TwoPointMixture):
        return model.values, model.weights
    if isinstance(model, IntegerDist):
        k = np.arange(len(model.pmf), dtype=float)
        return tuple(k.tolist()), tuple(model.pmf.probs.tolist())
    return None


def is_integer_supported(model: IntensityModel) -> bool:
    atoms = point_masses(model)
    if atoms is None:
        return False
    return all(float(v).is_integer() for v in atoms[0])


# ---------------------------------------------------------------------------
# Gini coefficient


def gini(model: IntensityModel) -> float:
    """Gini coefficient E|X - Y| / (2 E X).

    Closed forms for the degenerate, Pareto, and uniform families; exact
    double sums for atomic models; otherwise numerical integration of the
    equivalent single integral (tolerance 1e-8).
    """
    m = mean(model)
    if m <= 0:
        raise DomainError("Gini requires a strictly positive mean")
    if isinstance(model, Degenerate):
        return 0.0
    if isinstance(model, Pareto):
        return 1.0 / (2.0 * model.alpha - 1.0)
    if isinstance(model, Uniform):
        return (model.b - model.a) / (3.0 * (model.b + model.a))
    atoms = point_masses(model)
    if atoms is not None:
        values, weights = atoms
        acc = 0.0
        for vi, wi in zip(values, weights):
            for vj, wj in zip(values, weights):
                acc += wi * wj * abs(vi - vj)
        return acc / (2.0 * m)
    # E|X - Y| = 2 int F(x)(1 - F(x)) dx for non-negative X.
    lo, hi = support(model)

    def integrand(x):
        f = cdf(model, x)
        return f * (1.0 - f)

    total = 0.0
    breakpoint_ = max(m, lo + 1e-12)
    for a, b in ((lo, breakpoint_), (breakpoint_, hi)):
        result = integrate.quad(
            integrand, a, b, epsrel=1e-10, epsabs=1e-12, limit=200, full_output=True
        )
        if len(result) > 3:
            raise NumericError(
                f"Gini quadrature failed for {family_name(model)}: {result[3]}",
                achieved_tol=result[1],
            )
        total += result[0]
    return total / m


# ---------------------------------------------------------------------------
# Scaling


def scale_model(model: IntensityModel, rho: float) -> IntensityModel:
    """Distribution of rho * X within the same catalog."""
    if rho <= 0 or not math.isfinite(rho):
        raise DomainError("scale factor must be finite and positive")
    if rho == 1.0:
        return model
    if isinstance(model, Degenerate):
        return Degenerate(rho * model.value)
    if isinstance(model, Exponential):
        return Exponential(rho * model.mean)
    if isinstance(model, Gamma):
        return Gamma(model.shape, rho * model.mean)
    if isinstance(model, Pareto):
        return Pareto(rho * model.x_m, model.alpha)
    if isinstance(model, Uniform):
        return Uniform(rho * model.a, rho * model.b)
    if isinstance(model, TwoPointMixture):
        return TwoPointMixture(
            (rho * model.values[0], rho * model.values[1]), model.weights
        )
    raise DomainError("integer-supported models cannot be rescaled in-catalog")


def normalized(model: IntensityModel) -> IntensityModel:
    """Rescale to unit mean (for dense / abundant limit formulas)."""
    return scale_model(model, 1.0 / mean(model))


# ---------------------------------------------------------------------------
# Stochastic-dominance constructors and verification


@dataclass(frozen=True)
class SosdReport:
    """Outcome of a second-order stochastic dominance check."""

    passed: bool
    max_violation: float
    mean_gap: float


def verify_sosd(
    model: IntensityModel, spread: IntensityModel, grid_size: int = 2000
) -> SosdReport:
    """Check that ``spread`` is a mean-preserving spread of ``model``.

    Means must agree to 1e-10 and the integrated CDF difference must stay
    above -1e-10 on a dense grid running to the 1 - 1e-6 quantile. The
    integrals are closed-form, so step CDFs are handled exactly.
    """
    mean_gap = abs(mean(model) - mean(spread))
    hi = max(quantile(model, 1.0 - 1e-6), quantile(spread, 1.0 - 1e-6))
    grid = np.linspace(0.0, hi * (1.0 + 1e-12), grid_size)
    gap = np.array(
        [cdf_integral(spread, x) - cdf_integral(model, x) for x in grid]
    )
    max_violation = max(0.0, -float(gap.min()))
    passed = mean_gap <= 1e-10 and max_violation <= 1e-10
    return SosdReport(passed=passed, max_violation=max_violation, mean_gap=mean_gap)


def mps_pair(
    base: IntensityModel,
    kind: str,
    *,
    epsilon: float | None = None,
    new_shape: float | None = None,
    new_width: float | None = None,
) -> tuple[IntensityModel, IntensityModel]:
    """Build a machine-verified mean-preserving spread pair (base, spread)."""
    if kind == "two_point_spread":
        if not isinstance(base, Degenerate):
            raise ConstructionError("two_point_spread starts from a degenerate model")
        if epsilon is None or not 0 < epsilon <= base.value:
            raise ConstructionError("epsilon must lie in (0, value]")
        spread = TwoPointMixture(
            (base.value - epsilon, base.value + epsilon), (0.5, 0.5)
        )
    elif kind == "gamma_shape_drop":
        if not isinstance(base, Gamma):
            raise ConstructionError("gamma_shape_drop starts from a gamma model")
        if new_shape is None or not 0 < new_shape < base.shape:
            raise ConstructionError("new shape must lie in (0, shape)")
        spread = Gamma(new_shape, base.mean)
    elif kind == "uniform_widen":
        if not isinstance(base, Uniform):
            raise ConstructionError("uniform_widen starts from a uniform model")
        center = 0.5 * (base.a + base.b)
        width = base.b - base.a
        if new_width is None or not width < new_width <= 2 * center:
            raise ConstructionError("new width must lie in (width, 2 * mean]")
        spread = Uniform(center - 0.5 * new_width, center + 0.5 * new_width)
    else:
        raise ConstructionError(f"unknown spread kind {kind!r}")
    report = verify_sosd(base, spread)
    if not report.passed:
        raise ConstructionError(
            f"constructed pair fails SOSD verification: {report!r}"
        )
    return base, spread


@dataclass(frozen=True)
class FosdFamily:
    """Parametric family for a first-order stochastic dominance sweep.

    ``family`` selects the parameterization; the grid passed to
    ``fosd_sweep`` holds mean intensities, except for the Pareto where it
    holds shape values descending toward 1.
    """

    family: str
    shape: float | None = None  # gamma
    x_m: float | None = None  # pareto
    width: float | None = None  # uniform type 2
    a: float | None = None  # uniform type 3

    def __post_init__(self):
        known = {"degenerate", "gamma", "pareto", "uniform1", "uniform2", "uniform3"}
        if self.family not in known:
            raise DomainError(f"unknown sweep family {self.family!r}")


def _sweep_model(spec: FosdFamily, param: float) -> IntensityModel:
    if spec.family == "degenerate":
        return Degenerate(param)
    if spec.family == "gamma":
        if spec.shape is None:
            raise DomainError("gamma sweep needs a fixed shape")
        return Gamma(spec.shape, param)
    if spec.family == "pareto":
        if spec.x_m is None:
            raise DomainError("pareto sweep needs a fixed x_m")
        return Pareto(spec.x_m, param)
    if spec.family == "uniform1":
        # Support (mean/2, 3 mean/2): both ends scale with the mean.
        return Uniform(0.5 * param, 1.5 * param)
    if spec.family == "uniform2":
        if spec.width is None:
            raise DomainError("uniform2 sweep needs a fixed width")
        return Uniform(param - 0.5 * spec.width, param + 0.5 * spec.width)
    if spec.family == "uniform3":
        if spec.a is None:
            raise DomainError("uniform3 sweep needs a fixed lower endpoint")
        return Uniform(spec.a, 2.0 * param - spec.a)
    raise DomainError(f"unknown sweep family {spec.family!r}")


def fosd_sweep(spec: FosdFamily, grid) -> list[IntensityModel]:
    """Models ordered by increasing mean, adjacent pairs verified FOSD.

    Each adjacent pair is checked on a 1000-point grid: the later CDF must
    not exceed the earlier one anywhere (tolerance 1e-10).
    """
    params = [float(g) for g in grid]
    if len(params) < 1:
        raise DomainError("sweep grid must be non-empty")
    models = [_sweep_model(spec, g) for g in params]
    means = [mean(m) for m in models]
    if any(b <= a for a, b in zip(means, means[1:])):
        raise ConstructionError("sweep grid must give strictly increasing means")
    for earlier, later in zip(models, models[1:]):
        hi = max(quantile(earlier, 1.0 - 1e-6), quantile(later, 1.0 - 1e-6))
        xs = np.linspace(0.0, hi, 1000)
        worst = max(cdf(later, x) - cdf(earlier, x) for x in xs)
        if worst > 1e-10:
            raise ConstructionError(
                f"adjacent pair violates FOSD by {worst:.3e} "
                f"({earlier!r} -> {later!r})"
            )
    return models


# ---------------------------------------------------------------------------
# JSON serialization (CLI config format)


def model_to_json(model: IntensityModel) -> dict:
    if isinstance(model, Degenerate):
        params = {"value": model.value}
    elif isinstance(model, Exponential):
        params = {"mean": model.mean}
    elif isinstance(model, Gamma):
        params = {"shape": model.shape, "mean": model.mean}
    elif isinstance(model, Pareto):
        params = {"x_m": model.x_m, "alpha": model.alpha}
    elif isinstance(model, Uniform):
        params = {"a": model.a, "b": model.b}
    elif isinstance(model, TwoPointMixture):
        params = {"values": list(model.values), "weights": list(model.weights)}
    elif isinstance(model, IntegerDist):
        params = {"probs": model.pmf.probs.tolist()}
    else:
        raise DomainError(f"unknown model {model!r}")
    return {"family": family_name(model), "params": params}


def model_from_json(obj: dict) -> IntensityModel:
    if not isinstance(obj, dict):
        raise DomainError("model: expected object with 'family' and 'params'")
    extra = set(obj) - {"family", "params"}
    if extra:
        raise DomainError(f"model: unknown keys {sorted(extra)}")
    family = obj.get("family")
    params = obj.get("params", {})
    if not isinstance(params, dict):
        raise DomainError("model.params: expected object")
    try:
        if family == "degenerate":
            return Degenerate(**params)
        if family == "exponential":
            return Exponential(**params)
        if family == "gamma":
            return Gamma(**params)
        if family == "pareto":
            return Pareto(**params)
        if family == "uniform":
            return Uniform(**params)
        if family == "two_point":
            return TwoPointMixture(
                tuple(params["values"]), tuple(params["weights"])
            )
        if family == "integer":
            return IntegerDist(DiscretePMF(np.asarray(params["probs"], dtype=float)))
    except (TypeError, KeyError) as exc:
        raise DomainError(f"model.params: invalid for family {family!r}: {exc}")
    raise DomainError(f"model.family: unknown family {family!r}")


def family_name(model: IntensityModel) -> str:
    for cls, name in _FAMILY_NAMES.items():
        if isinstance(model, cls):
            return name
    return type(model).__name__
