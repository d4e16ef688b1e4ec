import math

import numpy as np
import pytest

from matchnet.errors import DomainError
from matchnet.intensity import Degenerate, Exponential, Pareto
from matchnet.large_market import LargeMarketSpec, f_large
from matchnet.simulator import (
    LargeMarketRecipe,
    SimConfig,
    degree_gof,
    estimate_f,
    estimate_q,
    frictionless_market,
    large_market_config,
    replication_rng,
    run_protocol,
    sample_network,
)
from matchnet.small_market import (
    FiniteMarketSpec,
    brute_force_applicant,
    brute_force_vacancy,
)


def spec_2x2(p=0.5):
    return FiniteMarketSpec.applicant_market(np.array([p, p]), 2)


class TestSampleNetwork:
    def test_sure_links_give_complete_graph(self):
        rng = replication_rng(0, 0)
        net = sample_network(FiniteMarketSpec.applicant_market(np.ones(3), 4), rng)
        assert net.links.all()

    def test_no_links_give_empty_graph(self):
        rng = replication_rng(0, 0)
        net = sample_network(FiniteMarketSpec.applicant_market(np.zeros(3), 4), rng)
        assert not net.links.any()

    def test_edge_count_identity(self):
        rng = replication_rng(42, 0)
        net = sample_network(spec_2x2(), rng)
        assert net.applicant_degrees.sum() == net.column_degrees.sum()

    def test_uniform_law_on_two_by_two(self):
        # all 16 graphs equally likely at p = 1/2
        rng = replication_rng(2024, 0)
        spec = spec_2x2(0.5)
        n = 1_000_000
        weights = np.array([1, 2, 4, 8])
        counts = np.zeros(16, dtype=int)
        for _ in range(n):
            net = sample_network(spec, rng)
            counts[int(net.links.ravel() @ weights)] += 1
        se = math.sqrt((1 / 16) * (15 / 16) / n)
        assert np.abs(counts / n - 1 / 16).max() <= 4 * se

    def test_realization_pattern_weight(self):
        # a specific 2x2 pattern with three links appears with mass p^3 (1-p)
        rng = replication_rng(123, 0)
        p = 0.3
        spec = spec_2x2(p)
        pattern = np.array([[True, True], [False, True]])
        n = 200_000
        hits = sum(
            np.array_equal(sample_network(spec, rng).links, pattern) for _ in range(n)
        )
        target = p**3 * (1 - p)
        se = math.sqrt(target * (1 - target) / n)
        assert abs(hits / n - target) <= 4 * se

    def test_vacancy_specific_sampling(self):
        rng = replication_rng(1, 0)
        spec = FiniteMarketSpec.vacancy_market(np.array([1.0, 0.0]), U=3)
        net = sample_network(spec, rng)
        assert net.links[:, 0].all() and not net.links[:, 1].any()


class TestRunProtocol:
    def test_single_vacancy_one_offer(self):
        rng = replication_rng(0, 1)
        links = np.ones((3, 1), dtype=bool)
        from matchnet.simulator import NetworkRealization

        out = run_protocol(NetworkRealization(links=links), "applicant_side", rng)
        assert out.matched.sum() == 1

    def test_complete_2x2_match_probabilities(self):
        # oracle values: P(specific applicant matched) = 3/4
        rng = replication_rng(7, 0)
        from matchnet.simulator import NetworkRealization

        links = np.ones((2, 2), dtype=bool)
        n = 200_000
        matched_first = 0
        both = 0
        for _ in range(n):
            out = run_protocol(NetworkRealization(links=links), "applicant_side", rng)
            matched_first += out.matched[0]
            both += out.matched.all()
        se = math.sqrt(0.75 * 0.25 / n)
        assert abs(matched_first / n - 0.75) <= 4 * se
        se_both = math.sqrt(0.5 * 0.5 / n)
        assert abs(both / n - 0.5) <= 4 * se_both

    def test_locations_all_matched_when_capacity_ample(self):
        rng = replication_rng(3, 0)
        from matchnet.simulator import NetworkRealization

        links = np.array([[True], [True], [False]])
        out = run_protocol(
            NetworkRealization(links=links, capacities=(5,)), "locations", rng
        )
        assert out.matched.tolist() == [True, True, False]

    def test_vacancy_side_fill_flags(self):
        rng = replication_rng(4, 0)
        from matchnet.simulator import NetworkRealization

        links = np.array([[True, False], [False, False]])
        out = run_protocol(NetworkRealization(links=links), "vacancy_side", rng)
        assert out.filled.tolist() == [True, False]
        assert out.matched.tolist() == [True, False]

    def test_protocol_mismatch_raises(self):
        rng = replication_rng(5, 0)
        from matchnet.simulator import NetworkRealization

        with pytest.raises(DomainError):
            run_protocol(
                NetworkRealization(links=np.ones((2, 2), dtype=bool)),
                "locations",
                rng,
            )


class TestEstimators:
    def test_deterministic_across_runs_and_workers(self):
        config = dict(market=spec_2x2(), protocol="applicant_side", replications=500)
        first = estimate_f(SimConfig(**config, seed=7, workers=1))
        again = estimate_f(SimConfig(**config, seed=7, workers=1))
        threaded = estimate_f(SimConfig(**config, seed=7, workers=4))
        assert first == again == threaded

    def test_seed_changes_estimate(self):
        config = dict(market=spec_2x2(), protocol="applicant_side", replications=500)
        a = estimate_f(SimConfig(**config, seed=7))
        b = estimate_f(SimConfig(**config, seed=8))
        assert a.estimate != b.estimate
        assert abs(a.estimate - b.estimate) <= 6 * max(a.std_error, b.std_error)

    def test_converges_to_brute_force_2x2(self):
        target = brute_force_applicant(np.full((2, 2), 0.5)).market_mean
        config = SimConfig(
            market=spec_2x2(), protocol="applicant_side", replications=1_000_000,
            seed=31,
        )
        estimate = estimate_f(config)
        assert abs(estimate.estimate - target) <= 4 * estimate.std_error

    def test_converges_to_brute_force_3x3(self):
        p = np.array([0.2, 0.5, 0.8])
        target = brute_force_applicant(np.tile(p[:, None], (1, 3))).market_mean
        config = SimConfig(
            market=FiniteMarketSpec.applicant_market(p, 3),
            protocol="applicant_side",
            replications=300_000,
            seed=17,
        )
        estimate = estimate_f(config)
        assert abs(estimate.estimate - target) <= 4 * estimate.std_error

    def test_vacancy_estimator_against_oracle(self):
        p = np.array([0.5, 0.5])
        target = brute_force_vacancy(np.tile(p[None, :], (2, 1))).market_mean
        config = SimConfig(
            market=FiniteMarketSpec.vacancy_market(p, 2),
            protocol="vacancy_side",
            replications=300_000,
            seed=23,
        )
        estimate = estimate_q(config)
        assert abs(estimate.estimate - target) <= 4 * estimate.std_error

    def test_monotone_in_intensity_paired_seeds(self):
        base = np.full(10, 0.2)
        config = dict(protocol="applicant_side", replications=2000, seed=5)
        lo = estimate_f(
            SimConfig(market=FiniteMarketSpec.applicant_market(base, 10), **config)
        )
        hi = estimate_f(
            SimConfig(
                market=FiniteMarketSpec.applicant_market(base + 0.1, 10), **config
            )
        )
        noise = 3 * math.hypot(lo.std_error, hi.std_error)
        assert hi.estimate >= lo.estimate - noise

    def test_protocol_estimator_pairing_enforced(self):
        with pytest.raises(DomainError):
            estimate_q(
                SimConfig(
                    market=spec_2x2(), protocol="applicant_side",
                    replications=1, seed=0,
                )
            )


class TestLargeMarketConfig:
    def test_degenerate_probabilities(self):
        spec = large_market_config(Degenerate(3.0), theta=1.0, U=1000, seed=9)
        assert spec.kind == "applicant"
        np.testing.assert_allclose(spec.applicant_probs, 0.003, atol=1e-15)
        assert spec.clamp_rate == 0.0

    def test_heavy_tail_clamping_reported(self):
        # analytic clamp probability per draw: P(d > V) = (x_m / V)^alpha
        model = Pareto(1.0, 1.2)
        U, theta = 100, 0.05
        V = round(U * theta)
        p_clamp = (1.0 / V) ** 1.2
        spec = large_market_config(model, theta=theta, U=U, seed=1)
        assert spec.clamp_rate > 0.0
        se = math.sqrt(p_clamp * (1 - p_clamp) / U)
        assert abs(spec.clamp_rate - p_clamp) <= 4 * se
        # at the tame benchmark the same pipeline reports zero clamping
        assert large_market_config(Degenerate(3.0), 1.0, 1000, 1).clamp_rate == 0.0

    def test_accounting_identity_on_proxy(self):
        from matchnet.small_market import accounting_check

        spec = large_market_config(Exponential(3.0), theta=2.0, U=500, seed=3)
        assert accounting_check(spec).residual <= 1e-12

    def test_vacancy_side_proxy(self):
        spec = large_market_config(
            Degenerate(2.0), theta=1.0, U=800, seed=4, side="vacancy"
        )
        assert spec.kind == "vacancy"
        np.testing.assert_allclose(spec.vacancy_probs, 2.0 / 800, atol=1e-15)

    def test_recipe_estimates_hit_analytic_target(self):
        model = Degenerate(3.0)
        recipe = LargeMarketRecipe(U=1000, theta=1.0, G=model)
        config = SimConfig(
            market=recipe, protocol="applicant_side", replications=60, seed=19
        )
        estimate = estimate_f(config)
        target = f_large(LargeMarketSpec(theta=1.0, G=model))
        assert abs(estimate.estimate - target) <= max(3 * estimate.std_error, 5e-3)

    def test_frictionless_market_is_deterministic_outcome(self):
        config = SimConfig(
            market=frictionless_market(1000, 0.5),
            protocol="locations",
            replications=20,
            seed=2,
        )
        estimate = estimate_f(config)
        assert estimate.estimate == 0.5


class TestDegreeGof:
    def test_binomial_calibration(self):
        rejections = 0
        for seed in range(20):
            config = SimConfig(
                market=spec_2x2(), protocol="applicant_side", replications=1, seed=seed
            )
            result = degree_gof(config, "applicant", n_networks=200)
            rejections += result.p_value < 0.001
        assert rejections <= 1

    def test_poisson_binomial_calibration(self):
        p = np.array([0.2, 0.5, 0.8])
        rejections = 0
        for seed in range(20):
            config = SimConfig(
                market=FiniteMarketSpec.applicant_market(p, 3),
                protocol="applicant_side",
                replications=1,
                seed=seed,
            )
            result = degree_gof(config, "vacancy", n_networks=200)
            rejections += result.p_value < 0.001
        assert rejections <= 1

    def test_wrong_law_is_rejected(self):
        # negative control: feed degrees from p=0.7 to the p=0.5 expectation
        config = SimConfig(
            market=spec_2x2(0.7), protocol="applicant_side", replications=1, seed=0
        )
        sampled = degree_gof(config, "applicant", n_networks=400)
        ref_config = SimConfig(
            market=spec_2x2(0.5), protocol="applicant_side", replications=1, seed=0
        )
        reference = degree_gof(ref_config, "applicant", n_networks=400)
        assert sampled.p_value >= 0.001  # consistent with its own law
        # build the mismatch by hand: observed from 0.7 vs expected at 0.5
        from matchnet.discrete import binomial_pmf
        from matchnet.simulator import replication_rng as rrng

        counts = np.zeros(3, dtype=int)
        for r in range(400):
            rng = replication_rng(0, (0x6E657477 << 32) + r)
            net = sample_network(spec_2x2(0.7), rng)
            counts += np.bincount(net.applicant_degrees, minlength=3)
        expected = binomial_pmf(2, 0.5).probs * counts.sum()
        stat = (((counts - expected) ** 2) / expected).sum()
        from scipy import stats as sp_stats

        assert sp_stats.chi2.sf(stat, 2) < 0.001

    def test_insufficient_counts_raise(self):
        config = SimConfig(
            market=spec_2x2(), protocol="applicant_side", replications=1, seed=0
        )
        with pytest.raises(DomainError):
            degree_gof(config, "applicant", n_networks=1)
