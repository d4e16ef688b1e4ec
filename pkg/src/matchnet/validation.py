"""Validation suites behind ``matchnet validate`` and the acceptance tests.

Three suites: ``oracle`` (closed forms against exhaustive enumeration),
``analytic`` (identities, orderings, shape reproduction, complete
monotonicity), ``simulation`` (Monte Carlo against analytic targets,
calibration, determinism). Every check returns a CheckResult with enough
detail to diagnose a failure from the JSON report alone.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from matchnet import experiments, intensity, simulator
from matchnet.intensity import (
    Degenerate,
    Exponential,
    Gamma,
    Pareto,
    TwoPointMixture,
    Uniform,
)
from matchnet.large_market import (
    LargeMarketSpec,
    ces_f,
    ces_scaling_dbar,
    complete_monotonicity_check,
    f_dense,
    f_large,
    f_locations_large,
    f_taylor1,
    phi,
    q_large,
)
from matchnet.simulator import LargeMarketRecipe, SimConfig
from matchnet.small_market import (
    FiniteMarketSpec,
    brute_force_applicant,
    brute_force_locations,
    brute_force_vacancy,
    job_finding_exact,
    locations_job_finding_exact,
    urnball_f,
    vacancy_fill_exact,
)

_CATALOG = (
    Degenerate(2.0),
    Exponential(2.0),
    Gamma(2.0, 2.0),
    Pareto(1.0, 2.0),
    Uniform(1.0, 3.0),
    TwoPointMixture((1.0, 3.0), (0.5, 0.5)),
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Oracle suite


def check_job_finding_oracle() -> CheckResult:
    """Closed-form job finding equals enumeration on the small-market grid."""
    worst = 0.0
    markets = 0
    for U in (1, 2, 3):
        for V in (1, 2, 3, 4):
            for ps in itertools.product((0.1, 0.5, 0.9), repeat=U):
                p = np.asarray(ps)
                exact = job_finding_exact(FiniteMarketSpec.applicant_market(p, V))
                oracle = brute_force_applicant(np.tile(p[:, None], (1, V)))
                worst = max(
                    worst, float(np.abs(exact.per_agent - oracle.per_agent).max())
                )
                markets += 1
    return CheckResult(
        "oracle.job_finding",
        worst <= 1e-12,
        {"markets": markets, "worst_gap": worst, "tolerance": 1e-12},
    )


def check_vacancy_fill_oracle() -> CheckResult:
    """Closed-form vacancy filling equals the assignment-enumeration oracle."""
    worst = 0.0
    markets = 0
    for U, V in ((2, 2), (3, 2), (2, 3)):
        for ps in itertools.product((0.1, 0.5, 0.9), repeat=V):
            p = np.asarray(ps)
            exact = vacancy_fill_exact(FiniteMarketSpec.vacancy_market(p, U))
            oracle = brute_force_vacancy(np.tile(p[None, :], (U, 1)))
            worst = max(
                worst, float(np.abs(exact.per_agent - oracle.per_agent).max())
            )
            markets += 1
    return CheckResult(
        "oracle.vacancy_fill",
        worst <= 1e-12,
        {"markets": markets, "worst_gap": worst, "tolerance": 1e-12},
    )


def check_locations_oracle() -> CheckResult:
    """Locations closed form equals enumeration, and reduces at v = 1."""
    worst = 0.0
    markets = 0
    for U in (1, 2, 3):
        for L in (1, 2):
            for v in itertools.product((0, 1, 2, 3), repeat=L):
                if sum(v) == 0:
                    continue
                for ps in itertools.product((0.1, 0.5, 0.9), repeat=U):
                    p = np.asarray(ps)
                    exact = locations_job_finding_exact(
                        FiniteMarketSpec.locations_market(p, v)
                    )
                    oracle = brute_force_locations(np.tile(p[:, None], (1, L)), v)
                    worst = max(
                        worst, float(np.abs(exact.per_agent - oracle.per_agent).max())
                    )
                    markets += 1
    reduction = 0.0
    for ps in itertools.product((0.1, 0.5, 0.9), repeat=3):
        p = np.asarray(ps)
        via_locations = locations_job_finding_exact(
            FiniteMarketSpec.locations_market(p, (1, 1, 1, 1))
        )
        direct = job_finding_exact(FiniteMarketSpec.applicant_market(p, 4))
        reduction = max(
            reduction,
            float(np.abs(via_locations.per_agent - direct.per_agent).max()),
        )
    passed = worst <= 1e-12 and reduction <= 1e-12
    return CheckResult(
        "oracle.locations",
        passed,
        {
            "markets": markets,
            "worst_gap": worst,
            "v1_reduction_gap": reduction,
            "tolerance": 1e-12,
        },
    )


# ---------------------------------------------------------------------------
# Analytic suite


def check_urnball_anchors() -> CheckResult:
    exact = urnball_f(2, 2)
    dense_gap = abs(
        f_large(LargeMarketSpec(theta=1.0, G=Degenerate(50.0)))
        - (1.0 - math.exp(-1.0))
    )
    passed = exact == 0.75 and dense_gap <= 1e-3
    return CheckResult(
        "analytic.urnball_anchors",
        passed,
        {"urnball_2_2": exact, "dense_limit_gap": dense_gap, "tolerance": 1e-3},
    )


def check_closed_form_anchors() -> CheckResult:
    worst_exp = 0.0
    for mean_ in (0.5, 3.0, 8.0):
        for theta in (0.25, 1.0, 4.0):
            got = f_large(LargeMarketSpec(theta=theta, G=Exponential(mean_)))
            want = 1.0 - 1.0 / (1.0 + mean_ * phi(mean_, theta))
            worst_exp = max(worst_exp, abs(got - want))
    worst_dense = max(
        abs(f_dense(intensity.normalized(Exponential(1.0)), t) - t / (1.0 + t))
        for t in (0.25, 1.0, 4.0)
    )
    passed = worst_exp <= 1e-12 and worst_dense <= 1e-12
    return CheckResult(
        "analytic.closed_form_anchors",
        passed,
        {"exponential_gap": worst_exp, "dense_gap": worst_dense, "tolerance": 1e-12},
    )


def check_ces_identity() -> CheckResult:
    worst = 0.0
    for theta in (0.25, 0.5, 1.0, 2.0, 4.0):
        for gamma in (0.5, 1.0):
            gap = abs(
                f_taylor1(ces_scaling_dbar(theta, gamma), theta) - ces_f(theta, gamma)
            )
            worst = max(worst, gap)
    return CheckResult(
        "analytic.ces_identity",
        worst <= 1e-12,
        {"worst_gap": worst, "tolerance": 1e-12},
    )


def check_corollary5() -> CheckResult:
    worst = 0.0
    for d_bar_V in (0.5, 1.0, 2.0, 4.0):
        for theta in (0.5, 1.0, 2.0, 4.0):
            f = f_large(LargeMarketSpec(theta=theta, G=Degenerate(theta * d_bar_V)))
            q = q_large(LargeMarketSpec(theta=theta, Ghat=Degenerate(d_bar_V)))
            worst = max(worst, abs(f - theta * q))
    return CheckResult(
        "analytic.corollary5",
        worst <= 1e-12,
        {"worst_gap": worst, "tolerance": 1e-12},
    )


def check_mps_batteries() -> CheckResult:
    catalog = experiments.default_mps_catalog()
    thetas = (0.5, 1.0, 2.0)
    detail = {}
    passed = True
    n_pairs = len({(repr(b), repr(s)) for ps in catalog.values() for b, s in ps})
    for variant, pairs in catalog.items():
        verdicts = experiments.mps_battery(pairs, variant, thetas)
        min_margin = min(v.min_margin for v in verdicts)
        if variant == "prop9":
            ok = all(v.passed for v in verdicts)
        else:
            ok = all(v.passed for v in verdicts) and min_margin >= 1e-8
        detail[variant] = {"pairs": len(pairs), "min_margin": min_margin, "ok": ok}
        passed = passed and ok
    passed = passed and n_pairs >= 6
    detail["distinct_pairs"] = n_pairs
    return CheckResult("analytic.mps_batteries", passed, detail)


def check_table1() -> CheckResult:
    results = experiments.table1_preset(theta=1.0, n_points=200)
    detail = {
        name: {
            "shape": r["verdict"].classification,
            "gini_trend": r["gini_trend"],
            "expected": [r["expected_shape"], r["expected_gini_trend"]],
            "matches": r["matches"],
        }
        for name, r in results.items()
    }
    return CheckResult(
        "analytic.table1", all(r["matches"] for r in results.values()), detail
    )


def check_prop1_properties() -> CheckResult:
    thetas = np.arange(0.1, 5.0 + 1e-9, 0.05)
    detail = {}
    passed = True
    for model in _CATALOG:
        f = np.array([f_large(LargeMarketSpec(theta=t, G=model)) for t in thetas])
        d1 = np.diff(f)
        d2 = np.diff(d1)
        tiny = f_large(LargeMarketSpec(theta=1e-6, G=model))
        ok = bool((d1 > 0).all() and (d2 < 0).all() and tiny < 1e-4)
        detail[intensity.family_name(model)] = {
            "min_first_diff": float(d1.min()),
            "max_second_diff": float(d2.max()),
            "f_at_1e-6": tiny,
            "ok": ok,
        }
        passed = passed and ok
    return CheckResult("analytic.prop1_properties", passed, detail)


def check_complete_monotonicity() -> CheckResult:
    domain = (0.2, 5.0)
    detail = {}
    ok_m1 = True
    for gamma in (0.5, 1.0):
        rep = complete_monotonicity_check(
            lambda t, g=gamma: 1.0 - ces_f(t, g), domain, max_order=8, tol=1e-9
        )
        detail[f"ces_complement_gamma_{gamma}"] = {
            "passed": rep.passed,
            "first_failure": rep.first_failure,
        }
        ok_m1 = ok_m1 and rep.passed

    alpha = 2
    rep_m2 = complete_monotonicity_check(
        lambda t: (1.0 - phi(float(alpha), t)) ** alpha, domain, max_order=8, tol=1e-9
    )
    detail["fixed_applications_alpha_2"] = {
        "passed": rep_m2.passed,
        "first_failure": rep_m2.first_failure,
    }
    rep_exp = complete_monotonicity_check(
        lambda t: math.exp(-t), domain, max_order=8, tol=1e-9
    )
    detail["exp_control"] = {"passed": rep_exp.passed}
    passed = ok_m1 and (not rep_m2.passed) and rep_m2.first_failure is not None
    passed = passed and rep_m2.first_failure[0] <= 8 and rep_exp.passed
    return CheckResult("analytic.complete_monotonicity", passed, detail)


# ---------------------------------------------------------------------------
# Simulation suite


def _mc_check(name, estimate, target) -> CheckResult:
    tolerance = max(3.0 * estimate.std_error, 5e-3)
    gap = abs(estimate.estimate - target)
    return CheckResult(
        name,
        gap <= tolerance,
        {
            "estimate": estimate.estimate,
            "target": target,
            "gap": gap,
            "tolerance": tolerance,
            "n_observations": estimate.n_observations,
            "clamp_rate": estimate.clamp_rate,
            "seed": estimate.seed,
        },
    )


def check_mc_job_finding(seed: int = 11) -> CheckResult:
    model = Exponential(3.0)
    recipe = LargeMarketRecipe(U=4000, theta=1.0, G=model)
    config = SimConfig(
        market=recipe, protocol="applicant_side", replications=50, seed=seed
    )
    estimate = simulator.estimate_f(config)
    target = f_large(LargeMarketSpec(theta=1.0, G=model))
    return _mc_check("simulation.mc_job_finding", estimate, target)


def check_mc_vacancy_fill(seed: int = 12) -> CheckResult:
    model = Degenerate(2.0)
    recipe = LargeMarketRecipe(U=2000, theta=1.0, Ghat=model)
    config = SimConfig(
        market=recipe, protocol="vacancy_side", replications=100, seed=seed
    )
    estimate = simulator.estimate_q(config)
    target = q_large(LargeMarketSpec(theta=1.0, Ghat=model))
    return _mc_check("simulation.mc_vacancy_fill", estimate, target)


def check_mc_locations(seed: int = 13) -> CheckResult:
    G, H = Degenerate(3.0), Degenerate(2.0)
    recipe = LargeMarketRecipe(U=4000, theta=1.0, G=G, H=H)
    config = SimConfig(market=recipe, protocol="locations", replications=50, seed=seed)
    estimate = simulator.estimate_f(config)
    target = f_locations_large(LargeMarketSpec(theta=1.0, G=G, H=H))
    return _mc_check("simulation.mc_locations", estimate, target)


def check_frictionless_sim(seed: int = 5) -> CheckResult:
    detail = {}
    passed = True
    for theta in (0.5, 1.5):
        config = SimConfig(
            market=simulator.frictionless_market(1000, theta),
            protocol="locations",
            replications=50,
            seed=seed,
        )
        estimate = simulator.estimate_f(config)
        target = min(1.0, theta)
        gap = abs(estimate.estimate - target)
        ok = gap <= 3.0 * estimate.std_error
        detail[f"theta_{theta}"] = {
            "estimate": estimate.estimate,
            "target": target,
            "gap": gap,
            "three_se": 3.0 * estimate.std_error,
            "ok": ok,
        }
        passed = passed and ok
    return CheckResult("simulation.frictionless", passed, detail)


def check_degree_gof() -> CheckResult:
    settings = {
        "applicant_binomial": dict(
            spec=FiniteMarketSpec.applicant_market(np.array([0.5, 0.5]), 2),
            which="applicant",
            n_networks=200,
        ),
        "vacancy_poisson_binomial": dict(
            spec=FiniteMarketSpec.applicant_market(np.array([0.2, 0.5, 0.8]), 3),
            which="vacancy",
            n_networks=200,
        ),
        "large_market_poisson": dict(spec=None, which="applicant_poisson", n_networks=5),
    }
    detail = {}
    passed = True
    for name, setting in settings.items():
        non_rejections = 0
        for seed in range(20):
            spec = setting["spec"]
            if spec is None:
                spec = simulator.large_market_config(
                    Degenerate(3.0), theta=1.0, U=2000, seed=seed
                )
            config = SimConfig(
                market=spec, protocol="applicant_side", replications=1, seed=seed
            )
            result = simulator.degree_gof(config, setting["which"], setting["n_networks"])
            non_rejections += result.p_value >= 0.001
        ok = non_rejections >= 19
        detail[name] = {"non_rejections": non_rejections, "required": 19, "ok": ok}
        passed = passed and ok
    return CheckResult("simulation.degree_gof", passed, detail)


def check_worker_invariance(seed: int = 7) -> CheckResult:
    spec = FiniteMarketSpec.applicant_market(np.full(200, 0.01), 200)
    estimates = []
    for workers in (1, 4, 8):
        config = SimConfig(
            market=spec,
            protocol="applicant_side",
            replications=64,
            seed=seed,
            workers=workers,
        )
        estimates.append(simulator.estimate_f(config))
    identical = estimates[0] == estimates[1] == estimates[2]
    return CheckResult(
        "simulation.worker_invariance",
        identical,
        {"estimates": [e.estimate for e in estimates], "workers": [1, 4, 8]},
    )


# ---------------------------------------------------------------------------
# Suite runners


_SUITES = {
    "oracle": (
        check_job_finding_oracle,
        check_vacancy_fill_oracle,
        check_locations_oracle,
    ),
    "analytic": (
        check_urnball_anchors,
        check_closed_form_anchors,
        check_ces_identity,
        check_corollary5,
        check_mps_batteries,
        check_table1,
        check_prop1_properties,
        check_complete_monotonicity,
    ),
    "simulation": (
        check_mc_job_finding,
        check_mc_vacancy_fill,
        check_mc_locations,
        check_frictionless_sim,
        check_degree_gof,
        check_worker_invariance,
    ),
}


def run_suite(suite: str) -> list[CheckResult]:
    if suite == "all":
        names = ("oracle", "analytic", "simulation")
    elif suite in _SUITES:
        names = (suite,)
    else:
        raise ValueError(f"unknown suite {suite!r}")
    results = []
    for name in names:
        for check in _SUITES[name]:
            results.append(check())
    return results
