"""Exact and truncated discrete-distribution kernels.

Degree and offer counts in the matching model are sums of independent
Bernoulli links, so everything downstream is built from four pmf
constructors (binomial, Poisson binomial, truncated Poisson, mixed
Poisson) plus the two expectation functionals the matching formulas
consume. All pmfs are indexed from k=0 so results from different
constructors align entry by entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special, stats

from matchnet.errors import DomainError, NumericError

_MASS_TOL = 1e-12

# Per-integral tolerances for the mixed-Poisson quadrature.
_QUAD_EPSREL = 1e-10
_QUAD_EPSABS = 1e-14

# Hard cap on mixed-Poisson support length. Heavy-tailed mixing
# distributions (Pareto with small alpha) cannot reach a 1e-12 tail in a
# feasible number of terms; the loop raises instead of silently stopping.
_MIXED_MAX_TERMS = 2000


@dataclass(frozen=True)
class DiscretePMF:
    """Probability mass function on {0, 1, ..., len(probs) - 1}.

    ``truncation_mass`` is the tail mass dropped when an infinite-support
    distribution is truncated; exact pmfs carry 0. Mass must account for
    the whole unit: sum(probs) + truncation_mass = 1 within 1e-12.
    """

    probs: np.ndarray
    truncation_mass: float = 0.0

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        if p.ndim != 1 or p.size == 0:
            raise DomainError("pmf must be a non-empty 1-D array")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise DomainError("pmf entries must be finite and non-negative")
        if not 0.0 <= self.truncation_mass <= 1.0:
            raise DomainError("truncation_mass must lie in [0, 1]")
        total = math.fsum(p.tolist()) + self.truncation_mass
        if abs(total - 1.0) > _MASS_TOL:
            raise DomainError(f"pmf mass is {total!r}, not 1 within {_MASS_TOL}")

    def __len__(self) -> int:
        return int(self.probs.size)

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.probs.size)

    def mean(self) -> float:
        return float(np.dot(np.arange(self.probs.size), self.probs))

    def variance(self) -> float:
        k = np.arange(self.probs.size)
        m = self.mean()
        return float(np.dot((k - m) ** 2, self.probs))


def _point_mass(k: int) -> DiscretePMF:
    probs = np.zeros(k + 1)
    probs[k] = 1.0
    return DiscretePMF(probs)


def poisson_binomial_pmf(p) -> DiscretePMF:
    """Exact pmf of the number of successes among independent Bernoulli(p_i).

    Computed by the O(n^2) convolution recurrence, which is exact and
    numerically stable for n up to ~1e4. An empty vector yields a point
    mass at 0.
    """
    q = np.atleast_1d(np.asarray(p, dtype=float))
    if q.ndim != 1:
        raise DomainError("success probabilities must form a 1-D vector")
    if q.size == 0:
        return _point_mass(0)
    if not np.all(np.isfinite(q)) or np.any(q < 0) or np.any(q > 1):
        raise DomainError("success probabilities must lie in [0, 1]")
    probs = np.zeros(q.size + 1)
    probs[0] = 1.0
    for n, pi in enumerate(q, start=1):
        probs[1 : n + 1] = probs[1 : n + 1] * (1.0 - pi) + probs[:n] * pi
        probs[0] *= 1.0 - pi
    return DiscretePMF(probs)


def binomial_pmf(n: int, p: float) -> DiscretePMF:
    """Exact Binomial(n, p) pmf on {0, ..., n}.

    Log-gamma evaluation, deliberately a different route from the
    Poisson binomial convolution so the two can cross-check each other.
    """
    if n < 0 or int(n) != n:
        raise DomainError("trial count must be a non-negative integer")
    if not 0.0 <= p <= 1.0 or not math.isfinite(p):
        raise DomainError("success probability must lie in [0, 1]")
    n = int(n)
    if n == 0:
        return _point_mass(0)
    if p == 0.0:
        probs = np.zeros(n + 1)
        probs[0] = 1.0
        return DiscretePMF(probs)
    if p == 1.0:
        return _point_mass(n)
    k = np.arange(n + 1)
    log_comb = (
        math.lgamma(n + 1)
        - special.gammaln(k + 1)
        - special.gammaln(n - k + 1)
    )
    probs = np.exp(log_comb + k * math.log(p) + (n - k) * math.log1p(-p))
    # Renormalize within float noise so the mass invariant holds exactly.
    probs = probs / math.fsum(probs.tolist())
    return DiscretePMF(probs)


def poisson_pmf(mean: float, tail_tol: float = 1e-12) -> DiscretePMF:
    """Poisson(mean) pmf truncated so the dropped tail mass is <= tail_tol."""
    if mean < 0 or not math.isfinite(mean):
        raise DomainError("Poisson mean must be finite and non-negative")
    if not 0.0 < tail_tol < 1.0:
        raise DomainError("tail_tol must lie in (0, 1)")
    if mean == 0.0:
        return _point_mass(0)
    k_max = int(stats.poisson.isf(tail_tol, mean))
    while stats.poisson.sf(k_max, mean) > tail_tol:
        k_max += 1
    probs = stats.poisson.pmf(np.arange(k_max + 1), mean)
    tail = max(0.0, 1.0 - math.fsum(probs.tolist()))
    return DiscretePMF(probs, truncation_mass=tail)


def mixed_poisson_pmf(model, tail_tol: float = 1e-12) -> DiscretePMF:
    """Pmf of a Poisson whose mean is drawn from an intensity distribution.

    P(d = k) = integral of (x^k / k!) e^{-x} dG(x). Point-mass mixing
    distributions are evaluated exactly; continuous ones by adaptive
    quadrature (relative tolerance 1e-10) with the integrand split at its
    interior mode for heavy-tailed supports.
    """
    from matchnet import intensity  # deferred: intensity depends on this module

    if not 0.0 < tail_tol < 1.0:
        raise DomainError("tail_tol must lie in (0, 1)")
    mixing_mean = intensity.mean(model)
    if not math.isfinite(mixing_mean):
        raise DomainError("mixing distribution must have a finite mean")

    atoms = intensity.point_masses(model)
    if atoms is not None:
        return _mixed_poisson_from_atoms(atoms, tail_tol)
    return _mixed_poisson_by_quadrature(model, tail_tol)


def _mixed_poisson_from_atoms(atoms, tail_tol: float) -> DiscretePMF:
    values, weights = atoms
    parts = []
    for value, weight in zip(values, weights):
        if weight == 0.0:
            continue
        # Split the tail budget by weight so component tails sum <= tail_tol.
        parts.append((weight, poisson_pmf(value, tail_tol=tail_tol * weight)))
    size = max(len(part) for _, part in parts)
    probs = np.zeros(size)
    for weight, part in parts:
        probs[: len(part)] += weight * part.probs
    tail = max(0.0, 1.0 - math.fsum(probs.tolist()))
    return DiscretePMF(probs, truncation_mass=tail)


def _mixed_poisson_by_quadrature(model, tail_tol: float) -> DiscretePMF:
    from matchnet import intensity

    lo, hi = intensity.support(model)
    probs: list[float] = []
    covered = 0.0
    for k in range(_MIXED_MAX_TERMS):
        log_k_fact = math.lgamma(k + 1)

        def integrand(x, _k=k, _lf=log_k_fact):
            if x <= 0.0:
                return 0.0
            return math.exp(_k * math.log(x) - x - _lf) * intensity.pdf(model, x)

        pieces = _split_at_mode(lo, hi, mode=float(k))
        value = 0.0
        abserr = 0.0
        for a, b in pieces:
            result = integrate.quad(
                integrand, a, b, epsrel=_QUAD_EPSREL, epsabs=_QUAD_EPSABS,
                limit=200, full_output=True,
            )
            if len(result) > 3:  # quad appended a warning message
                raise NumericError(
                    f"mixed-Poisson quadrature failed at k={k}: {result[3]}",
                    achieved_tol=result[1],
                )
            value += result[0]
            abserr += result[1]
        if abserr > max(_QUAD_EPSABS * 10, 1e-8 * max(value, 1e-300)):
            raise NumericError(
                f"mixed-Poisson quadrature too loose at k={k}",
                achieved_tol=abserr,
            )
        probs.append(max(0.0, value))
        covered = math.fsum(probs)
        if 1.0 - covered <= tail_tol:
            break
    else:
        raise NumericError(
            f"mixed-Poisson tail {1.0 - covered:.3e} above tail_tol after "
            f"{_MIXED_MAX_TERMS} terms",
            achieved_tol=1.0 - covered,
        )
    arr = np.asarray(probs)
    # Quadrature noise can leave the covered mass a hair above 1.
    tail = max(0.0, 1.0 - math.fsum(arr.tolist()))
    if covered > 1.0 + _MASS_TOL:
        arr = arr / covered
        tail = 0.0
    return DiscretePMF(arr, truncation_mass=tail)


def _split_at_mode(lo: float, hi: float, mode: float):
    """Integration pieces for x^k e^{-x} pdf(x), split at the interior mode."""
    if math.isinf(hi):
        if mode > lo:
            return [(lo, mode), (mode, np.inf)]
        return [(lo, np.inf)]
    if lo < mode < hi:
        return [(lo, mode), (mode, hi)]
    return [(lo, hi)]


def expect_reciprocal_one_plus(pmf: DiscretePMF) -> float:
    """E[1 / (1 + K)] for K ~ pmf.

    The dropped tail contributes 0, so the result underestimates the true
    expectation by at most ``pmf.truncation_mass``.
    """
    k = np.arange(pmf.probs.size)
    return float(np.dot(pmf.probs, 1.0 / (1.0 + k)))


def expect_min_capacity(pmf: DiscretePMF, v: int) -> float:
    """E[min{1, v / (1 + K)}] for K ~ pmf and an integer capacity v >= 1."""
    if v < 1 or int(v) != v:
        raise DomainError("capacity must be a positive integer")
    k = np.arange(pmf.probs.size)
    return float(np.dot(pmf.probs, np.minimum(1.0, float(v) / (1.0 + k))))


def total_variation(a: DiscretePMF, b: DiscretePMF) -> float:
    """Total-variation distance between two pmfs on the shared 0-based grid."""
    size = max(len(a), len(b))
    pa = np.zeros(size)
    pb = np.zeros(size)
    pa[: len(a)] = a.probs
    pb[: len(b)] = b.probs
    # Truncated tails count as fully disjoint mass.
    return 0.5 * (float(np.abs(pa - pb).sum()) + a.truncation_mass + b.truncation_mass)
