"""Large-market closed forms for matching probabilities.

Everything here is a deterministic function of market tightness and the
intensity distributions: the mean job-finding probability, its vacancy
side counterpart, the locations variant, Taylor approximations, the dense
and abundant-vacancy limits, the CES tightness-intensity scaling identity,
and a finite-difference test for complete monotonicity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from matchnet import intensity
from matchnet.discrete import expect_min_capacity, poisson_pmf
from matchnet.errors import ConstructionError, DomainError
from matchnet.intensity import IntensityModel

# Below this argument the closed-form ratio (1 - e^-x)/x loses digits to
# cancellation; a short series is exact to machine precision there.
_SERIES_CUTOFF = 1e-8

_LOCATIONS_TAIL = 1e-12


@dataclass(frozen=True)
class LargeMarketSpec:
    """Tightness plus the intensity distributions a formula needs.

    G drives applicant search intensities, Ghat vacancy advertising
    intensities, H the (integer) number of vacancies per location.
    """

    theta: float
    G: IntensityModel | None = None
    Ghat: IntensityModel | None = None
    H: IntensityModel | None = None

    def __post_init__(self):
        if self.theta <= 0 or not math.isfinite(self.theta):
            raise DomainError("market tightness must be finite and positive")
        for name in ("G", "Ghat"):
            model = getattr(self, name)
            if model is not None and not math.isfinite(intensity.mean(model)):
                raise DomainError(f"{name} must have a finite mean")
        if self.H is not None and not intensity.is_integer_supported(self.H):
            raise DomainError("H must be supported on non-negative integers")


def phi(d_bar_U: float, theta: float) -> float:
    """Offer probability per link, (1 - e^{-d_bar_U/theta}) / (d_bar_U/theta)."""
    if d_bar_U < 0:
        raise DomainError("mean intensity must be non-negative")
    if theta <= 0:
        raise DomainError("market tightness must be positive")
    x = d_bar_U / theta
    if x < _SERIES_CUTOFF:
        return 1.0 - x / 2.0 + x * x / 6.0
    return -math.expm1(-x) / x


def f_large(spec: LargeMarketSpec) -> float:
    """Mean job-finding probability, 1 - M_G(-phi)."""
    if spec.G is None:
        raise DomainError("f_large needs an applicant intensity distribution G")
    d_bar_U = intensity.mean(spec.G)
    return 1.0 - intensity.mgf_neg(spec.G, phi(d_bar_U, spec.theta))


def q_large(spec: LargeMarketSpec) -> float:
    """Mean vacancy-filling probability, (1 - e^{-theta (1 - M_Ghat(-1))}) / theta."""
    if spec.Ghat is None:
        raise DomainError("q_large needs a vacancy intensity distribution Ghat")
    linked = 1.0 - intensity.mgf_neg(spec.Ghat, 1.0)
    return -math.expm1(-spec.theta * linked) / spec.theta


def chi_locations(
    H: IntensityModel, d_bar_U: float, theta: float, tail_tol: float = _LOCATIONS_TAIL
) -> tuple[float, float]:
    """Offer probability per location link and its truncation error bound.

    chi = E[min{1, v / (1 + D)}] with D Poisson with mean v_bar * d_bar_U
    / theta. The outer sum runs over the (exact) support of H, the inner
    Poisson is truncated at tail_tol; both dropped tails enter the bound.
    """
    atoms = intensity.point_masses(H)
    if atoms is None or not intensity.is_integer_supported(H):
        raise DomainError("H must be supported on non-negative integers")
    v_bar = intensity.mean(H)
    pmf = poisson_pmf(v_bar * d_bar_U / theta, tail_tol=tail_tol)
    chi = 0.0
    outer_dropped = 0.0
    for value, weight in zip(*atoms):
        if weight == 0.0:
            continue
        v = int(value)
        chi += weight * (0.0 if v == 0 else expect_min_capacity(pmf, v))
    if isinstance(H, intensity.IntegerDist):
        outer_dropped = H.pmf.truncation_mass
    return chi, pmf.truncation_mass + outer_dropped


def f_locations_large(spec: LargeMarketSpec) -> float:
    """Mean job-finding probability when vacancies pool into locations."""
    if spec.G is None or spec.H is None:
        raise DomainError("f_locations_large needs both G and H")
    d_bar_U = intensity.mean(spec.G)
    chi, _ = chi_locations(spec.H, d_bar_U, spec.theta)
    return 1.0 - intensity.mgf_neg(spec.G, chi)


def frictionless_f(theta: float) -> float:
    """Accounting bound min{1, theta}: one location, complete network."""
    if theta < 0:
        raise DomainError("market tightness must be non-negative")
    return min(1.0, theta)


# ---------------------------------------------------------------------------
# Taylor approximations around the mean intensity


def f_taylor1(d_bar_U: float, theta: float) -> float:
    """First-order approximation 1 - e^{-d_bar_U phi} (degenerate benchmark)."""
    return -math.expm1(-d_bar_U * phi(d_bar_U, theta))


def f_taylor2(d_bar_U: float, var: float, theta: float) -> float:
    """Second-order approximation; dispersion enters with a negative sign."""
    if var < 0:
        raise DomainError("variance must be non-negative")
    p = phi(d_bar_U, theta)
    return f_taylor1(d_bar_U, theta) - 0.5 * p * p * math.exp(-p * d_bar_U) * var


def f_taylor_series(G: IntensityModel, theta: float, order: int) -> float:
    """Taylor expansion of 1 - M_G(-phi) around the mean, truncated at ``order``.

    Term k carries (-1)^{k+1} phi^k e^{-phi d_bar_U} E[(X - d_bar_U)^k] / k!.
    """
    if order < 1 or int(order) != order:
        raise DomainError("expansion order must be a positive integer")
    d_bar_U = intensity.mean(G)
    p = phi(d_bar_U, theta)
    damp = math.exp(-p * d_bar_U)
    terms = [-math.expm1(-p * d_bar_U)]
    for k in range(2, int(order) + 1):
        mu_k = intensity.central_moment(G, k)
        if not math.isfinite(mu_k):
            raise DomainError(
                f"central moment of order {k} is infinite for {intensity.family_name(G)}"
            )
        terms.append((-1.0) ** (k + 1) * p**k * damp * mu_k / math.factorial(k))
    return math.fsum(terms)


# ---------------------------------------------------------------------------
# Limit regimes


def _require_unit_mean(G: IntensityModel) -> None:
    m = intensity.mean(G)
    if abs(m - 1.0) > 1e-9:
        raise ConstructionError(
            f"limit formulas need a unit-mean model; got mean {m!r} "
            "(use intensity.normalized)"
        )


def f_dense(G_normalized: IntensityModel, theta: float) -> float:
    """Dense-network limit 1 - M(-theta) for a unit-mean intensity model."""
    if theta <= 0:
        raise DomainError("market tightness must be positive")
    _require_unit_mean(G_normalized)
    return 1.0 - intensity.mgf_neg(G_normalized, theta)


def f_abundant(G_normalized: IntensityModel, d_bar_U: float) -> float:
    """Abundant-vacancy limit 1 - M(-d_bar_U) for a unit-mean intensity model."""
    if d_bar_U < 0:
        raise DomainError("mean intensity must be non-negative")
    _require_unit_mean(G_normalized)
    return 1.0 - intensity.mgf_neg(G_normalized, d_bar_U)


# ---------------------------------------------------------------------------
# CES scaling condition


def ces_f(theta: float, gamma: float) -> float:
    """CES job-finding probability (1 + theta^-gamma)^(-1/gamma)."""
    if gamma <= 0:
        raise DomainError("CES gamma must be positive")
    if theta <= 0:
        raise DomainError("market tightness must be positive")
    base = theta**-gamma
    if math.isinf(base):
        return 0.0
    return (1.0 + base) ** (-1.0 / gamma)


def ces_scaling_dbar(theta: float, gamma: float) -> float:
    """Mean intensity that makes the first-order formula equal the CES value.

    Inverts f_taylor1 at the CES probability; the inner logarithm argument
    must stay positive, which gamma <= 1 guarantees for every theta > 0.
    """
    f0 = ces_f(theta, gamma)
    inner = 1.0 + math.log1p(-f0) / theta
    if inner <= 0.0:
        raise DomainError(
            f"CES scaling undefined at gamma={gamma}, theta={theta}: "
            "log argument is non-positive"
        )
    return -theta * math.log(inner)


# ---------------------------------------------------------------------------
# Proportional scaling (re-export point for the comparative statics hook)


def scale_model(G: IntensityModel, rho: float) -> IntensityModel:
    """Distribution of rho * X; f_large increases in rho through 1."""
    return intensity.scale_model(G, rho)


# ---------------------------------------------------------------------------
# Complete monotonicity (Hausdorff finite-difference test)


@dataclass(frozen=True)
class CompleteMonotonicityReport:
    """Outcome of the alternating-sign finite-difference check."""

    passed: bool
    first_failure: tuple[int, float] | None
    max_order: int
    boundary_value: float
    boundary_ok: bool


def complete_monotonicity_check(
    m,
    domain: tuple[float, float],
    max_order: int = 8,
    step: float = 0.2,
    tol: float = 1e-9,
    boundary_eps: float = 1e-8,
    boundary_tol: float = 1e-6,
) -> CompleteMonotonicityReport:
    """Check (-1)^n * forward-difference_n of m >= -tol up to ``max_order``.

    Completely monotone functions have forward differences alternating in
    sign at every order. The function must be evaluable on
    [lo, hi + max_order * step]; differences use compensated summation so
    the noise floor sits well below tol. Also reports m near 0, which must
    approach 1 for m to be the transform of a probability distribution.
    """
    lo, hi = domain
    if not (0 < lo < hi):
        raise DomainError("domain must satisfy 0 < lo < hi")
    if not 1 <= max_order <= 10:
        raise DomainError("max_order must lie in 1..10")
    if step <= 0:
        raise DomainError("step must be positive")
    n_grid = int(math.floor((hi - lo) / step + 1e-12)) + 1
    values = [float(m(lo + i * step)) for i in range(n_grid + max_order)]
    if any(not math.isfinite(v) for v in values):
        raise DomainError("function evaluation failed inside the test domain")
    first_failure: tuple[int, float] | None = None
    for n in range(1, max_order + 1):
        sign = (-1.0) ** n
        coefs = [sign * (-1.0) ** (n - i) * math.comb(n, i) for i in range(n + 1)]
        for g in range(n_grid):
            adjusted = math.fsum(c * values[g + i] for i, c in enumerate(coefs))
            if adjusted < -tol:
                first_failure = (n, lo + g * step)
                break
        if first_failure is not None:
            break
    boundary_value = float(m(boundary_eps))
    boundary_ok = abs(boundary_value - 1.0) <= boundary_tol
    return CompleteMonotonicityReport(
        passed=first_failure is None and boundary_ok,
        first_failure=first_failure,
        max_order=max_order,
        boundary_value=boundary_value,
        boundary_ok=boundary_ok,
    )
