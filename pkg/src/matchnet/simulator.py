"""Seeded Monte Carlo simulation of the application network and protocols.

Reproducibility contract: every replication owns a private counter-based
(Philox) substream keyed by (seed, replication index), and results are
pooled by order-independent integer summation, so estimates are identical
across runs and across worker counts. Offer randomness is sampled here,
unlike the exact oracles; the estimators stay plain pooled fractions.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from matchnet import intensity
from matchnet.discrete import (
    DiscretePMF,
    binomial_pmf,
    poisson_binomial_pmf,
    poisson_pmf,
)
from matchnet.errors import DomainError
from matchnet.intensity import IntensityModel
from matchnet.small_market import FiniteMarketSpec

# Entropy tags keep the market-draw stream distinct from replication streams.
_MARKET_TAG = 0x6D61726B
_NETWORK_TAG = 0x6E657477


@dataclass(frozen=True)
class LargeMarketRecipe:
    """Finite proxy of a large market: intensities drawn, then p = d / columns.

    Exactly one of G (applicant side), Ghat (vacancy side), or (G, H)
    (locations) selects the market shape. V is round(theta * U).
    """

    U: int
    theta: float
    G: IntensityModel | None = None
    Ghat: IntensityModel | None = None
    H: IntensityModel | None = None

    def __post_init__(self):
        if self.U < 10:
            raise DomainError("large-market proxies need U >= 10")
        if self.theta <= 0:
            raise DomainError("market tightness must be positive")
        if round(self.theta * self.U) < 1:
            raise DomainError("derived vacancy count must be at least 1")
        if self.Ghat is not None and (self.G is not None or self.H is not None):
            raise DomainError("vacancy-side recipes take Ghat alone")
        if self.G is None and self.Ghat is None:
            raise DomainError("recipe needs G or Ghat")
        if self.H is not None and not intensity.is_integer_supported(self.H):
            raise DomainError("H must be supported on non-negative integers")

    @property
    def V(self) -> int:
        return int(round(self.theta * self.U))


@dataclass(frozen=True)
class SimConfig:
    market: FiniteMarketSpec | LargeMarketRecipe
    protocol: str
    replications: int
    seed: int
    workers: int = 1

    def __post_init__(self):
        if self.protocol not in ("applicant_side", "vacancy_side", "locations"):
            raise DomainError(f"unknown protocol {self.protocol!r}")
        if self.replications < 1:
            raise DomainError("replications must be positive")
        if self.workers < 1:
            raise DomainError("workers must be positive")


@dataclass(frozen=True)
class SimEstimate:
    estimate: float
    std_error: float
    n_observations: int
    clamp_rate: float
    seed: int


@dataclass(frozen=True)
class NetworkRealization:
    """One sampled bipartite graph; columns are vacancies or locations."""

    links: np.ndarray
    capacities: tuple[int, ...] | None = None

    @property
    def applicant_degrees(self) -> np.ndarray:
        return self.links.sum(axis=1)

    @property
    def column_degrees(self) -> np.ndarray:
        return self.links.sum(axis=0)


@dataclass(frozen=True)
class ProtocolOutcome:
    matched: np.ndarray
    filled: np.ndarray | None = None


def replication_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based substream owned by one replication."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, index))))


def _column_probs(spec: FiniteMarketSpec) -> tuple[np.ndarray, int, bool]:
    """Per-column Bernoulli parameters: (per-applicant vector, columns, by_column)."""
    if spec.kind == "locations":
        return spec.applicant_probs, spec.L, False
    if spec.kind == "applicant":
        return spec.applicant_probs, spec.V, False
    if spec.kind == "vacancy":
        return spec.vacancy_probs, spec.V, True
    raise DomainError("matrix specs are oracle-only; simulate a vector spec")


def sample_network(spec: FiniteMarketSpec, rng: np.random.Generator) -> NetworkRealization:
    """Draw every link as an independent Bernoulli, column by column."""
    if spec.kind == "matrix":
        links = rng.random(spec.matrix.shape) < spec.matrix
        return NetworkRealization(links=links)
    probs, n_cols, by_column = _column_probs(spec)
    U = spec.U
    links = np.empty((U, n_cols), dtype=bool)
    for j in range(n_cols):
        p = probs[j] if by_column else probs
        links[:, j] = rng.random(U) < p
    return NetworkRealization(links=links, capacities=spec.locations_v)


def run_protocol(
    realization: NetworkRealization, protocol: str, rng: np.random.Generator
) -> ProtocolOutcome:
    """Resolve offers (and acceptances where defined) on a sampled network."""
    links = realization.links
    U, n_cols = links.shape
    if protocol == "applicant_side":
        matched = np.zeros(U, dtype=bool)
        for j in range(n_cols):
            linked = np.flatnonzero(links[:, j])
            if linked.size:
                matched[linked[rng.integers(linked.size)]] = True
        return ProtocolOutcome(matched=matched)
    if protocol == "vacancy_side":
        offers: list[list[int]] = [[] for _ in range(U)]
        for j in range(n_cols):
            linked = np.flatnonzero(links[:, j])
            if linked.size:
                offers[linked[rng.integers(linked.size)]].append(j)
        matched = np.zeros(U, dtype=bool)
        filled = np.zeros(n_cols, dtype=bool)
        for i in range(U):
            held = offers[i]
            if held:
                matched[i] = True
                filled[held[rng.integers(len(held))]] = True
        return ProtocolOutcome(matched=matched, filled=filled)
    if protocol == "locations":
        if realization.capacities is None:
            raise DomainError("locations protocol needs per-location capacities")
        matched = np.zeros(U, dtype=bool)
        for j, capacity in enumerate(realization.capacities):
            linked = np.flatnonzero(links[:, j])
            n = linked.size
            k = min(capacity, n)
            if k == 0:
                continue
            if k == n:
                matched[linked] = True
            else:
                matched[rng.choice(linked, size=k, replace=False)] = True
        return ProtocolOutcome(matched=matched)
    raise DomainError(f"unknown protocol {protocol!r}")


# ---------------------------------------------------------------------------
# Finite proxies of large markets


def large_market_config(
    model: IntensityModel,
    theta: float,
    U: int,
    seed: int,
    side: str = "applicant",
    H: IntensityModel | None = None,
) -> FiniteMarketSpec:
    """Materialize a finite proxy market from a large-market recipe.

    Intensities are drawn i.i.d. and mapped to linking probabilities
    p = min{1, d / columns}; the clamp fraction is recorded on the spec
    rather than raised, since clamping is a finite-size artifact.
    """
    if side == "applicant":
        recipe = LargeMarketRecipe(U=U, theta=theta, G=model, H=H)
    elif side == "vacancy":
        recipe = LargeMarketRecipe(U=U, theta=theta, Ghat=model)
    else:
        raise DomainError(f"unknown side {side!r}")
    rng = np.random.Generator(
        np.random.Philox(np.random.SeedSequence((seed, _MARKET_TAG)))
    )
    return _materialize(recipe, rng)


def _materialize(recipe: LargeMarketRecipe, rng: np.random.Generator) -> FiniteMarketSpec:
    V = recipe.V
    if recipe.Ghat is not None:
        draws = np.asarray(intensity.sample(recipe.Ghat, rng, size=V), dtype=float)
        p = draws / recipe.U
        clamped = p > 1.0
        return FiniteMarketSpec.vacancy_market(
            np.minimum(p, 1.0), U=recipe.U, clamp_rate=float(clamped.mean())
        )
    if recipe.H is not None:
        v_bar = intensity.mean(recipe.H)
        L = max(1, int(round(V / v_bar)))
        caps = np.asarray(
            intensity.sample(recipe.H, rng, size=L), dtype=float
        ).astype(int)
        draws = np.asarray(intensity.sample(recipe.G, rng, size=recipe.U), dtype=float)
        p = draws / L
        clamped = p > 1.0
        return FiniteMarketSpec.locations_market(
            np.minimum(p, 1.0), caps, clamp_rate=float(clamped.mean())
        )
    draws = np.asarray(intensity.sample(recipe.G, rng, size=recipe.U), dtype=float)
    p = draws / V
    clamped = p > 1.0
    return FiniteMarketSpec.applicant_market(
        np.minimum(p, 1.0), V=V, clamp_rate=float(clamped.mean())
    )


def frictionless_market(U: int, theta: float) -> FiniteMarketSpec:
    """Single location holding all vacancies, complete network."""
    V = int(round(theta * U))
    if V < 1:
        raise DomainError("derived vacancy count must be at least 1")
    return FiniteMarketSpec.locations_market(np.ones(U), (V,))


# ---------------------------------------------------------------------------
# Pooled estimators


def _replication_tally(config: SimConfig, index: int) -> tuple[int, int, int, int]:
    """(successes, observations, clamped draws, intensity draws) for one replication."""
    rng = replication_rng(config.seed, index)
    if isinstance(config.market, LargeMarketRecipe):
        spec = _materialize(config.market, rng)
        clamp_draws = spec.U if spec.kind != "vacancy" else spec.V
        clamped = int(round((spec.clamp_rate or 0.0) * clamp_draws))
    else:
        spec = config.market
        clamp_draws = 0
        clamped = 0
    outcome = run_protocol(sample_network(spec, rng), config.protocol, rng)
    if config.protocol == "vacancy_side":
        return int(outcome.filled.sum()), int(outcome.filled.size), clamped, clamp_draws
    return int(outcome.matched.sum()), int(outcome.matched.size), clamped, clamp_draws


def _pooled_estimate(config: SimConfig) -> SimEstimate:
    indices = range(config.replications)
    if config.workers == 1:
        tallies = [_replication_tally(config, i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            tallies = list(pool.map(lambda i: _replication_tally(config, i), indices))
    successes = sum(t[0] for t in tallies)
    observations = sum(t[1] for t in tallies)
    clamped = sum(t[2] for t in tallies)
    clamp_draws = sum(t[3] for t in tallies)
    estimate = successes / observations
    std_error = math.sqrt(estimate * (1.0 - estimate) / observations)
    return SimEstimate(
        estimate=estimate,
        std_error=std_error,
        n_observations=observations,
        clamp_rate=clamped / clamp_draws if clamp_draws else 0.0,
        seed=config.seed,
    )


def estimate_f(config: SimConfig) -> SimEstimate:
    """Pooled fraction of applicants matched across replications."""
    if config.protocol == "vacancy_side":
        raise DomainError("estimate_f needs an applicant-side or locations protocol")
    return _pooled_estimate(config)


def estimate_q(config: SimConfig) -> SimEstimate:
    """Pooled fraction of vacancies filled across replications."""
    if config.protocol != "vacancy_side":
        raise DomainError("estimate_q needs the vacancy-side protocol")
    return _pooled_estimate(config)


# ---------------------------------------------------------------------------
# Degree-distribution goodness of fit


@dataclass(frozen=True)
class GofResult:
    statistic: float
    p_value: float
    dof: int
    cells: int
    n_observations: int


def _expected_degree_pmf(
    market: FiniteMarketSpec | LargeMarketRecipe, which: str
) -> DiscretePMF:
    """Analytic degree law matching the sampled market."""
    if isinstance(market, LargeMarketRecipe):
        raise DomainError("materialize the recipe first (large_market_config)")
    if which == "applicant":
        if market.kind == "applicant":
            cols = market.V
        elif market.kind == "locations":
            cols = market.L
        else:
            raise DomainError("applicant degrees need applicant-specific linking")
        parts = [binomial_pmf(cols, p) for p in market.applicant_probs]
        size = max(len(part) for part in parts)
        probs = np.zeros(size)
        for part in parts:
            probs[: len(part)] += part.probs / len(parts)
        return DiscretePMF(probs)
    if which == "vacancy":
        if market.kind not in ("applicant", "locations"):
            raise DomainError("vacancy degrees need applicant-specific linking")
        return poisson_binomial_pmf(market.applicant_probs)
    if which == "applicant_poisson":
        # Large-market claim: applicant degrees are (a mixture of) Poissons
        # with means p_i * columns.
        cols = market.L if market.kind == "locations" else market.V
        means = market.applicant_probs * cols
        parts = [poisson_pmf(m, tail_tol=1e-12) for m in means]
        size = max(len(part) for part in parts)
        probs = np.zeros(size)
        for part in parts:
            probs[: len(part)] += part.probs / len(parts)
        tail = max(0.0, 1.0 - math.fsum(probs.tolist()))
        return DiscretePMF(probs, truncation_mass=tail)
    raise DomainError(f"unknown degree side {which!r}")


def _pool_cells(observed: np.ndarray, expected: np.ndarray, min_expected: float = 5.0):
    """Merge tail cells until every expected count clears the threshold."""
    obs = list(observed.astype(float))
    exp = list(expected)
    # Right tail first, then the left, re-checking after each merge.
    while len(exp) > 1 and exp[-1] < min_expected:
        exp[-2] += exp[-1]
        obs[-2] += obs[-1]
        del exp[-1], obs[-1]
    while len(exp) > 1 and exp[0] < min_expected:
        exp[1] += exp[0]
        obs[1] += obs[0]
        del exp[0], obs[0]
    if min(exp) < min_expected:
        raise DomainError(
            "expected cell counts stay below 5 after pooling; draw more networks"
        )
    return np.asarray(obs), np.asarray(exp)


def degree_gof(
    config: SimConfig, which: str, n_networks: int
) -> GofResult:
    """Chi-square test of the empirical degree histogram against its law.

    Pools degrees over agents and networks; each network uses the
    substream keyed by (seed, network index tag).
    """
    if n_networks < 1:
        raise DomainError("n_networks must be positive")
    if isinstance(config.market, LargeMarketRecipe):
        raise DomainError("materialize the recipe first (large_market_config)")
    spec = config.market
    pmf = _expected_degree_pmf(spec, which)
    max_degree = len(pmf) - 1
    counts = np.zeros(len(pmf), dtype=np.int64)
    per_network = spec.U if which != "vacancy" else (
        spec.L if spec.kind == "locations" else spec.V
    )
    for r in range(n_networks):
        rng = replication_rng(config.seed, (_NETWORK_TAG << 32) + r)
        realization = sample_network(spec, rng)
        degrees = (
            realization.applicant_degrees
            if which != "vacancy"
            else realization.column_degrees
        )
        clipped = np.minimum(degrees, max_degree)  # tail mass pools anyway
        counts += np.bincount(clipped, minlength=len(pmf))
    n_obs = n_networks * per_network
    expected = pmf.probs * n_obs
    # Fold the analytic truncated tail into the last cell.
    expected[-1] += pmf.truncation_mass * n_obs
    observed, expected = _pool_cells(counts, expected)
    statistic = float(((observed - expected) ** 2 / expected).sum())
    dof = observed.size - 1
    p_value = float(stats.chi2.sf(statistic, dof))
    return GofResult(
        statistic=statistic,
        p_value=p_value,
        dof=dof,
        cells=observed.size,
        n_observations=n_obs,
    )


__all__ = [
    "GofResult",
    "LargeMarketRecipe",
    "NetworkRealization",
    "ProtocolOutcome",
    "SimConfig",
    "SimEstimate",
    "degree_gof",
    "estimate_f",
    "estimate_q",
    "frictionless_market",
    "large_market_config",
    "replication_rng",
    "run_protocol",
    "sample_network",
]
