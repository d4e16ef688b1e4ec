"""Exact finite-market matching probabilities and enumeration oracles.

The closed-form routes (job finding, vacancy filling, locations) are built
on the Poisson binomial kernels. The brute-force oracles enumerate every
link realization, integrating the offer randomness analytically, and share
no code with the formulas they validate. Oracle size guards are hard
errors: silently truncated ground truth would poison every downstream
check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from matchnet.discrete import (
    expect_min_capacity,
    expect_reciprocal_one_plus,
    poisson_binomial_pmf,
)
from matchnet.errors import DomainError, SizeGuardError

_APPLICANT_GUARD = 20  # enumerates 2^(U*V) networks
_VACANCY_GUARD = 12  # enumerates networks x offer assignments


@dataclass(frozen=True)
class MatchProbabilities:
    """Per-agent matching probabilities plus their market mean."""

    per_agent: np.ndarray
    market_mean: float

    def __post_init__(self):
        p = np.array(self.per_agent, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "per_agent", p)
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
            raise DomainError("per-agent probabilities must lie in [0, 1]")

    @classmethod
    def from_per_agent(cls, per_agent) -> "MatchProbabilities":
        p = np.asarray(per_agent, dtype=float)
        return cls(per_agent=p, market_mean=float(p.mean()))


@dataclass(frozen=True)
class FiniteMarketSpec:
    """Primitives of a finite market.

    Exactly one linking parameterization is set: an applicant-specific
    vector (with V homogeneous vacancies), a vacancy-specific vector (with
    U homogeneous applicants), an applicant-specific vector over locations
    with capacities v, or a full matrix (oracles only).
    """

    U: int
    V: int
    applicant_probs: np.ndarray | None = None
    vacancy_probs: np.ndarray | None = None
    locations_v: tuple[int, ...] | None = None
    matrix: np.ndarray | None = None
    clamp_rate: float | None = None

    def __post_init__(self):
        if self.U < 1:
            raise DomainError("market needs at least one applicant")
        if self.V < 0:
            raise DomainError("vacancy count must be non-negative")
        given = [
            self.applicant_probs is not None,
            self.vacancy_probs is not None,
            self.matrix is not None,
        ]
        if sum(given) != 1:
            raise DomainError("exactly one linking parameterization must be set")
        for name in ("applicant_probs", "vacancy_probs", "matrix"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.array(arr, dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
            if not np.all(np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
                raise DomainError(f"{name} entries must lie in [0, 1]")
        if self.locations_v is not None:
            v = tuple(int(x) for x in self.locations_v)
            if any(x < 0 for x in v):
                raise DomainError("location capacities must be non-negative integers")
            object.__setattr__(self, "locations_v", v)
            if self.applicant_probs is None:
                raise DomainError("locations markets use applicant-specific linking")
            if self.V != sum(v):
                raise DomainError("V must equal the total location capacity")
        if self.applicant_probs is not None and self.applicant_probs.size != self.U:
            raise DomainError("applicant probability vector must have length U")
        if self.vacancy_probs is not None and self.vacancy_probs.size != self.V:
            raise DomainError("vacancy probability vector must have length V")
        if self.matrix is not None and self.matrix.shape != (self.U, self.V):
            raise DomainError("matrix must have shape (U, V)")

    @classmethod
    def applicant_market(cls, p, V: int, clamp_rate: float | None = None):
        p = np.asarray(p, dtype=float)
        return cls(U=p.size, V=int(V), applicant_probs=p, clamp_rate=clamp_rate)

    @classmethod
    def vacancy_market(cls, p, U: int, clamp_rate: float | None = None):
        p = np.asarray(p, dtype=float)
        return cls(U=int(U), V=p.size, vacancy_probs=p, clamp_rate=clamp_rate)

    @classmethod
    def locations_market(cls, p, v, clamp_rate: float | None = None):
        p = np.asarray(p, dtype=float)
        v = tuple(int(x) for x in v)
        return cls(
            U=p.size,
            V=sum(v),
            applicant_probs=p,
            locations_v=v,
            clamp_rate=clamp_rate,
        )

    @classmethod
    def matrix_market(cls, P):
        P = np.asarray(P, dtype=float)
        return cls(U=P.shape[0], V=P.shape[1], matrix=P)

    @property
    def L(self) -> int:
        if self.locations_v is None:
            raise DomainError("not a locations market")
        return len(self.locations_v)

    @property
    def kind(self) -> str:
        if self.locations_v is not None:
            return "locations"
        if self.applicant_probs is not None:
            return "applicant"
        if self.vacancy_probs is not None:
            return "vacancy"
        return "matrix"


# ---------------------------------------------------------------------------
# Closed-form routes


def job_finding_exact(spec: FiniteMarketSpec) -> MatchProbabilities:
    """Per-applicant probability of receiving at least one offer.

    f_i = 1 - (1 - p_i * E[1/(1 + K_i)])^V with K_i the Poisson binomial
    count of competing applicants at a vacancy.
    """
    if spec.applicant_probs is None or spec.locations_v is not None:
        raise DomainError("job_finding_exact needs applicant-specific linking")
    p = spec.applicant_probs
    out = np.empty(spec.U)
    for i in range(spec.U):
        rivals = np.delete(p, i)
        offer_prob = expect_reciprocal_one_plus(poisson_binomial_pmf(rivals))
        out[i] = 1.0 - (1.0 - p[i] * offer_prob) ** spec.V
    return MatchProbabilities.from_per_agent(out)


def urnball_f(U: int, V: int) -> float:
    """Job-finding probability when every applicant applies everywhere."""
    if U < 1 or V < 0:
        raise DomainError("urnball_f needs U >= 1 and V >= 0")
    return 1.0 - (1.0 - 1.0 / U) ** V


def vacancy_fill_exact(spec: FiniteMarketSpec) -> MatchProbabilities:
    """Per-vacancy filling probability under vacancy-specific linking.

    q_j = (1 - (1 - p_j)^U) * E[1/(1 + O_j)] where O_j counts competing
    offers at the applicant vacancy j selects, a Poisson binomial over
    z_k = (1 - (1 - p_k)^U) / U.
    """
    if spec.vacancy_probs is None:
        raise DomainError("vacancy_fill_exact needs vacancy-specific linking")
    p = spec.vacancy_probs
    U = spec.U
    z = (1.0 - (1.0 - p) ** U) / U
    out = np.empty(spec.V)
    for j in range(spec.V):
        accept_prob = expect_reciprocal_one_plus(
            poisson_binomial_pmf(np.delete(z, j))
        )
        out[j] = (1.0 - (1.0 - p[j]) ** U) * accept_prob
    return MatchProbabilities.from_per_agent(out)


def locations_job_finding_exact(spec: FiniteMarketSpec) -> MatchProbabilities:
    """Per-applicant job-finding probability with capacity-v locations.

    f_i = 1 - prod_j (1 - p_i * E[min{1, v_j / (1 + K_i)}]).
    """
    if spec.locations_v is None:
        raise DomainError("locations_job_finding_exact needs a locations market")
    p = spec.applicant_probs
    v = spec.locations_v
    out = np.empty(spec.U)
    for i in range(spec.U):
        pmf = poisson_binomial_pmf(np.delete(p, i))
        no_offer = 1.0
        for vj in v:
            offer_prob = 0.0 if vj == 0 else expect_min_capacity(pmf, vj)
            no_offer *= 1.0 - p[i] * offer_prob
        out[i] = 1.0 - no_offer
    return MatchProbabilities.from_per_agent(out)


@dataclass(frozen=True)
class AccountingIdentity:
    d_bar_U: float
    d_bar_V: float
    theta: float
    residual: float


def accounting_check(spec: FiniteMarketSpec) -> AccountingIdentity:
    """Mean-degree identity d_bar_U = theta * d_bar_V for any finite spec."""
    if spec.V == 0:
        raise DomainError("accounting identity needs at least one vacancy")
    if spec.matrix is not None:
        total = float(spec.matrix.sum())
    elif spec.applicant_probs is not None:
        cols = spec.L if spec.locations_v is not None else spec.V
        total = float(spec.applicant_probs.sum()) * cols
    else:
        total = float(spec.vacancy_probs.sum()) * spec.U
    cols = spec.L if spec.locations_v is not None else spec.V
    d_bar_U = total / spec.U
    d_bar_V = total / cols
    theta = cols / spec.U
    return AccountingIdentity(
        d_bar_U=d_bar_U,
        d_bar_V=d_bar_V,
        theta=theta,
        residual=abs(d_bar_U - theta * d_bar_V),
    )


# ---------------------------------------------------------------------------
# Enumeration oracles


class _Kahan:
    """Compensated accumulator; 2^20 weighted terms exceed plain-sum accuracy."""

    __slots__ = ("total", "_c")

    def __init__(self):
        self.total = 0.0
        self._c = 0.0

    def add(self, x: float) -> None:
        y = x - self._c
        t = self.total + y
        self._c = (t - self.total) - y
        self.total = t


def _enumeration_setup(P: np.ndarray, guard: int):
    P = np.asarray(P, dtype=float)
    if P.ndim != 2:
        raise DomainError("oracle expects a full U x V probability matrix")
    if not np.all(np.isfinite(P)) or np.any(P < 0) or np.any(P > 1):
        raise DomainError("matrix entries must lie in [0, 1]")
    U, V = P.shape
    if U * V > guard:
        raise SizeGuardError(
            f"oracle enumerates 2^(U*V); U*V={U * V} exceeds the guard {guard}"
        )
    # Deterministic links (p=0 or p=1) are fixed outside the enumeration.
    free = [(i, j) for i in range(U) for j in range(V) if 0.0 < P[i, j] < 1.0]
    base = P == 1.0
    return P, U, V, free, base


def _gray_realizations(P, free, base):
    """Yield (links, weight) over all realizations in Gray-code order.

    The link matrix and column degrees mutate in place between yields; the
    weight is recomputed from scratch each step because a multiplicative
    carry would drift past the oracle's 1e-12 accuracy bar over 2^20 steps.
    """
    links = base.copy()
    n = len(free)
    for k in range(1 << n):
        if k > 0:
            bit = ((k & -k)).bit_length() - 1
            i, j = free[bit]
            links[i, j] = not links[i, j]
        weight = 1.0
        for i, j in free:
            weight *= P[i, j] if links[i, j] else 1.0 - P[i, j]
        yield links, weight


def brute_force_applicant(P) -> MatchProbabilities:
    """Exhaustive-enumeration job-finding oracle over all link realizations.

    Conditional on the realized network, each linked vacancy offers to one
    of its applicants uniformly at random, so applicant i is matched with
    probability 1 - prod_{j in N_i} (1 - 1/d_j); the offer randomness is
    integrated analytically.
    """
    P, U, V, free, base = _enumeration_setup(P, _APPLICANT_GUARD)
    acc = [_Kahan() for _ in range(U)]
    for links, weight in _gray_realizations(P, free, base):
        degrees = links.sum(axis=0)
        for i in range(U):
            miss = 1.0
            row = links[i]
            for j in range(V):
                if row[j]:
                    miss *= 1.0 - 1.0 / degrees[j]
            acc[i].add(weight * (1.0 - miss))
    return MatchProbabilities.from_per_agent([a.total for a in acc])


def brute_force_vacancy(P) -> MatchProbabilities:
    """Exhaustive oracle for vacancy filling: networks x offer assignments.

    Per realization, every linked vacancy offers to one uniformly chosen
    applicant (enumerated exactly), then each applicant holding offers
    accepts one uniformly at random; a vacancy is filled when its offer is
    the accepted one.
    """
    P, U, V, free, base = _enumeration_setup(P, _VACANCY_GUARD)
    acc = [_Kahan() for _ in range(V)]
    for links, weight in _gray_realizations(P, free, base):
        columns = [np.flatnonzero(links[:, j]) for j in range(V)]
        choice_sets = [col if col.size else [None] for col in columns]
        assignment_prob = 1.0
        for col in columns:
            if col.size:
                assignment_prob /= col.size
        for targets in itertools.product(*choice_sets):
            offers = np.zeros(U, dtype=int)
            for target in targets:
                if target is not None:
                    offers[target] += 1
            for j, target in enumerate(targets):
                if target is not None:
                    acc[j].add(weight * assignment_prob / offers[target])
    return MatchProbabilities.from_per_agent([a.total for a in acc])


def brute_force_locations(P, v) -> MatchProbabilities:
    """Exhaustive job-finding oracle with capacity-v locations.

    Per realization, an applicant linked to location j holding n_j linked
    applicants receives an offer with probability min{1, v_j / n_j},
    independently across locations.
    """
    P, U, L, free, base = _enumeration_setup(P, _APPLICANT_GUARD)
    v = tuple(int(x) for x in v)
    if len(v) != L:
        raise DomainError("capacity vector length must match the location count")
    if any(x < 0 for x in v):
        raise DomainError("location capacities must be non-negative integers")
    acc = [_Kahan() for _ in range(U)]
    for links, weight in _gray_realizations(P, free, base):
        counts = links.sum(axis=0)
        for i in range(U):
            miss = 1.0
            row = links[i]
            for j in range(L):
                if row[j]:
                    miss *= 1.0 - min(1.0, v[j] / counts[j])
            acc[i].add(weight * (1.0 - miss))
    return MatchProbabilities.from_per_agent([a.total for a in acc])
