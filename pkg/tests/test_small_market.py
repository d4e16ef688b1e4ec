import itertools
import math

import numpy as np
import pytest

from matchnet.errors import DomainError, SizeGuardError
from matchnet.small_market import (
    FiniteMarketSpec,
    accounting_check,
    brute_force_applicant,
    brute_force_locations,
    brute_force_vacancy,
    job_finding_exact,
    locations_job_finding_exact,
    urnball_f,
    vacancy_fill_exact,
)


def applicant_spec(p, V):
    return FiniteMarketSpec.applicant_market(np.asarray(p, dtype=float), V)


class TestJobFindingExact:
    def test_complete_2x2(self):
        # p = 1 everywhere collapses to the urn-ball form 1 - (1 - 1/U)^V
        result = job_finding_exact(applicant_spec([1.0, 1.0], 2))
        np.testing.assert_allclose(result.per_agent, [0.75, 0.75], atol=1e-15)

    def test_no_links_no_matches(self):
        result = job_finding_exact(applicant_spec([0.0, 0.0, 0.0], 5))
        assert result.market_mean == 0.0

    def test_symmetric_half(self):
        result = job_finding_exact(applicant_spec([0.5, 0.5], 2))
        np.testing.assert_allclose(result.per_agent, [0.609375, 0.609375], atol=1e-15)

    def test_closed_form_2x2_common_p(self):
        # f = 1 - (1 - p(1 - p/2))^2 for a 2x2 market with common p
        for p in (0.2, 0.5, 0.8):
            result = job_finding_exact(applicant_spec([p, p], 2))
            expected = 1.0 - (1.0 - p * (1.0 - p / 2.0)) ** 2
            assert result.per_agent[0] == pytest.approx(expected, abs=1e-15)

    def test_monotone_in_own_and_rival_intensity(self):
        base = np.array([0.4, 0.5, 0.6])
        f0 = job_finding_exact(applicant_spec(base, 3)).per_agent
        up_own = base.copy()
        up_own[0] += 0.05
        f1 = job_finding_exact(applicant_spec(up_own, 3)).per_agent
        assert f1[0] > f0[0]
        up_rival = base.copy()
        up_rival[1] += 0.05
        f2 = job_finding_exact(applicant_spec(up_rival, 3)).per_agent
        assert f2[0] < f0[0]


class TestUrnball:
    def test_single_pair(self):
        assert urnball_f(1, 1) == 1.0

    def test_two_by_two(self):
        assert urnball_f(2, 2) == 0.75

    def test_large_market_limit(self):
        theta = 1.5
        gaps = []
        for U in (10, 100, 1000, 10000):
            gaps.append(abs(urnball_f(U, int(theta * U)) - (1 - math.exp(-theta))))
        assert all(a > b for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < 1e-4


class TestVacancyFillExact:
    def test_single_vacancy_sure_link(self):
        spec = FiniteMarketSpec.vacancy_market(np.array([1.0]), U=3)
        assert vacancy_fill_exact(spec).per_agent[0] == 1.0

    def test_zero_intensity_vacancy(self):
        spec = FiniteMarketSpec.vacancy_market(np.array([0.0, 0.5]), U=2)
        result = vacancy_fill_exact(spec)
        assert result.per_agent[0] == 0.0

    def test_two_applicants_one_vacancy(self):
        for p in (0.3, 0.7):
            spec = FiniteMarketSpec.vacancy_market(np.array([p]), U=2)
            assert vacancy_fill_exact(spec).per_agent[0] == pytest.approx(
                1 - (1 - p) ** 2, abs=1e-15
            )


class TestOracleAgreement:
    def test_applicant_oracle_2x2(self):
        p = np.array([0.5, 0.5])
        exact = job_finding_exact(applicant_spec(p, 2))
        oracle = brute_force_applicant(np.tile(p[:, None], (1, 2)))
        np.testing.assert_allclose(exact.per_agent, oracle.per_agent, atol=1e-12)

    def test_applicant_oracle_heterogeneous(self):
        p = np.array([0.1, 0.9, 0.4])
        exact = job_finding_exact(applicant_spec(p, 4))
        oracle = brute_force_applicant(np.tile(p[:, None], (1, 4)))
        np.testing.assert_allclose(exact.per_agent, oracle.per_agent, atol=1e-12)

    def test_vacancy_oracle_2x2(self):
        p = np.array([0.5, 0.5])
        exact = vacancy_fill_exact(FiniteMarketSpec.vacancy_market(p, 2))
        oracle = brute_force_vacancy(np.tile(p[None, :], (2, 1)))
        np.testing.assert_allclose(exact.per_agent, oracle.per_agent, atol=1e-12)

    def test_vacancy_oracle_heterogeneous_2x3(self):
        p = np.array([0.2, 0.6, 0.9])
        exact = vacancy_fill_exact(FiniteMarketSpec.vacancy_market(p, 2))
        oracle = brute_force_vacancy(np.tile(p[None, :], (2, 1)))
        np.testing.assert_allclose(exact.per_agent, oracle.per_agent, atol=1e-12)

    def test_locations_oracle(self):
        p = np.array([0.5, 0.5, 0.5])
        exact = locations_job_finding_exact(
            FiniteMarketSpec.locations_market(p, (2, 1))
        )
        oracle = brute_force_locations(np.tile(p[:, None], (1, 2)), (2, 1))
        np.testing.assert_allclose(exact.per_agent, oracle.per_agent, atol=1e-12)


class TestBruteForceOracles:
    def test_sure_match_1x1(self):
        assert brute_force_applicant(np.array([[1.0]])).per_agent[0] == 1.0

    def test_vacancy_1x1(self):
        for p in (0.0, 0.4, 1.0):
            assert brute_force_vacancy(np.array([[p]])).per_agent[0] == pytest.approx(
                p, abs=1e-15
            )

    def test_vacancy_two_applicants(self):
        p = 0.6
        got = brute_force_vacancy(np.full((2, 1), p)).per_agent[0]
        assert got == pytest.approx(1 - (1 - p) ** 2, abs=1e-15)

    def test_weights_sum_to_one_via_complement(self):
        # P(matched) + P(unmatched) decompose the full realization space
        P = np.array([[0.3, 0.8], [0.5, 0.1]])
        result = brute_force_applicant(P)
        assert np.all(result.per_agent >= 0) and np.all(result.per_agent <= 1)

    def test_applicant_size_guard(self):
        with pytest.raises(SizeGuardError):
            brute_force_applicant(np.full((5, 5), 0.5))

    def test_vacancy_size_guard(self):
        with pytest.raises(SizeGuardError):
            brute_force_vacancy(np.full((4, 4), 0.5))

    def test_locations_frictionless_case(self):
        # single location, complete network, capacity V: f = min(1, V/U)
        for U, V in ((4, 2), (2, 4), (3, 3)):
            oracle = brute_force_locations(np.ones((U, 1)), (V,))
            assert oracle.market_mean == pytest.approx(min(1.0, V / U), abs=1e-15)

    def test_locations_reduces_to_applicant_protocol_at_v1(self):
        P = np.array([[0.3, 0.8], [0.5, 0.1]])
        loc = brute_force_locations(P, (1, 1))
        app = brute_force_applicant(P)
        np.testing.assert_allclose(loc.per_agent, app.per_agent, atol=1e-14)

    def test_matrix_entries_validated(self):
        with pytest.raises(DomainError):
            brute_force_applicant(np.array([[0.5, 1.5]]))


class TestLocationsExact:
    def test_v1_equals_job_finding(self):
        p = np.array([0.3, 0.6, 0.9])
        via_locations = locations_job_finding_exact(
            FiniteMarketSpec.locations_market(p, (1, 1, 1, 1))
        )
        direct = job_finding_exact(applicant_spec(p, 4))
        np.testing.assert_allclose(
            via_locations.per_agent, direct.per_agent, atol=1e-12
        )

    def test_frictionless_special_case(self):
        spec = FiniteMarketSpec.locations_market(np.ones(4), (2,))
        assert locations_job_finding_exact(spec).market_mean == pytest.approx(
            0.5, abs=1e-15
        )

    def test_zero_capacity_location_is_inert(self):
        p = np.array([0.5, 0.5])
        with_dead = locations_job_finding_exact(
            FiniteMarketSpec.locations_market(p, (2, 0))
        )
        without = locations_job_finding_exact(
            FiniteMarketSpec.locations_market(p, (2,))
        )
        # the zero-capacity location contributes links but never offers
        assert with_dead.per_agent == pytest.approx(without.per_agent, abs=1e-15)


class TestAccounting:
    def test_common_p_identity(self):
        spec = applicant_spec([0.5, 0.5], 2)
        identity = accounting_check(spec)
        assert identity.d_bar_U == 1.0
        assert identity.d_bar_V == 1.0
        assert identity.theta == 1.0
        assert identity.residual == 0.0

    def test_heterogeneous_residual(self):
        spec = applicant_spec([0.13, 0.87, 0.55, 0.21], 2)
        assert accounting_check(spec).residual <= 1e-12

    def test_matrix_and_vacancy_variants(self):
        m = accounting_check(FiniteMarketSpec.matrix_market(np.array([[0.1, 0.9]])))
        assert m.residual <= 1e-12
        v = accounting_check(
            FiniteMarketSpec.vacancy_market(np.array([0.4, 0.8]), U=3)
        )
        assert v.residual <= 1e-12

    def test_realized_edge_identity(self):
        # any realized bipartite graph balances row and column degree sums
        rng = np.random.default_rng(0)
        links = rng.random((6, 4)) < 0.4
        assert links.sum(axis=1).sum() == links.sum(axis=0).sum()


class TestSpecValidation:
    def test_exactly_one_parameterization(self):
        with pytest.raises(DomainError):
            FiniteMarketSpec(
                U=2,
                V=2,
                applicant_probs=np.array([0.5, 0.5]),
                vacancy_probs=np.array([0.5, 0.5]),
            )

    def test_locations_capacity_sum(self):
        with pytest.raises(DomainError):
            FiniteMarketSpec(
                U=2, V=5, applicant_probs=np.array([0.5, 0.5]), locations_v=(2, 1)
            )

    def test_probability_range(self):
        with pytest.raises(DomainError):
            applicant_spec([0.5, 1.5], 2)

    def test_grid_sweep_exactness(self):
        # criterion-1 style spot sweep at a coarser grid, full agreement
        for U, V in ((2, 3), (3, 2)):
            for ps in itertools.product((0.1, 0.9), repeat=U):
                exact = job_finding_exact(applicant_spec(ps, V))
                oracle = brute_force_applicant(
                    np.tile(np.asarray(ps)[:, None], (1, V))
                )
                np.testing.assert_allclose(
                    exact.per_agent, oracle.per_agent, atol=1e-12
                )
