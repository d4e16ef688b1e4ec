import numpy as np
import pytest

from matchnet.errors import DomainError
from matchnet.experiments import (
    ces_condition_probe,
    classify_shape,
    classify_trend,
    default_mps_catalog,
    figure2_surface,
    format_float,
    fosd_experiment,
    mps_battery,
    scaling_experiment,
    surface_to_csv,
    sweep_rows_to_csv,
    table1_preset,
)
from matchnet.intensity import (
    Degenerate,
    Exponential,
    FosdFamily,
    Gamma,
    Pareto,
    TwoPointMixture,
    Uniform,
)
from matchnet.large_market import LargeMarketSpec, ces_scaling_dbar, f_large


class TestShapeClassification:
    def test_increasing(self):
        verdict = classify_shape([1, 2, 3], [0.1, 0.2, 0.3])
        assert verdict.classification == "increasing"

    def test_decreasing(self):
        verdict = classify_shape([1, 2, 3], [0.3, 0.2, 0.1])
        assert verdict.classification == "decreasing"

    def test_inverted_u_needs_interior_max_with_margin(self):
        verdict = classify_shape([1, 2, 3], [0.1, 0.3, 0.2])
        assert verdict.classification == "inverted_U"
        assert verdict.argmax_param == 2

    def test_flat_is_inconclusive(self):
        verdict = classify_shape([1, 2, 3], [0.1, 0.1, 0.1])
        assert verdict.classification == "inconclusive"

    def test_trend_labels(self):
        assert classify_trend([0.2, 0.2, 0.2]) == "constant"
        assert classify_trend([0.1, 0.2, 0.3]) == "increasing"
        assert classify_trend([0.3, 0.2, 0.1]) == "decreasing"


class TestFosdExperiment:
    def test_gamma_increasing_constant_gini(self):
        family = FosdFamily("gamma", shape=2.0)
        grid = np.linspace(0.5, 20.0, 60)
        rows, verdict, gini_trend = fosd_experiment(family, grid, theta=1.0)
        assert verdict.classification == "increasing"
        assert gini_trend == "constant"
        means = [r.d_bar_U for r in rows]
        assert all(a < b for a, b in zip(means, means[1:]))

    def test_pareto_inverted_u_increasing_gini(self):
        family = FosdFamily("pareto", x_m=1.0)
        grid = np.geomspace(8.0, 1.05, 100)
        rows, verdict, gini_trend = fosd_experiment(family, grid, theta=1.0)
        assert verdict.classification == "inverted_U"
        assert gini_trend == "increasing"

    def test_uniform2_increasing_decreasing_gini(self):
        family = FosdFamily("uniform2", width=1.0)
        grid = np.linspace(0.6, 20.0, 60)
        rows, verdict, gini_trend = fosd_experiment(family, grid, theta=1.0)
        assert verdict.classification == "increasing"
        assert gini_trend == "decreasing"

    def test_shape_stable_under_grid_refinement(self):
        family = FosdFamily("pareto", x_m=1.0)
        coarse = np.geomspace(8.0, 1.05, 100)
        fine = np.geomspace(8.0, 1.05, 200)
        _, verdict_coarse, trend_coarse = fosd_experiment(family, coarse, 1.0)
        _, verdict_fine, trend_fine = fosd_experiment(family, fine, 1.0)
        assert verdict_coarse.classification == verdict_fine.classification
        assert trend_coarse == trend_fine


class TestTable1:
    def test_all_six_rows_reproduce(self):
        results = table1_preset(theta=1.0, n_points=200)
        assert len(results) == 6
        for name, result in results.items():
            assert result["matches"], (
                name,
                result["verdict"].classification,
                result["gini_trend"],
            )

    def test_uniform3_regimes_at_representative_anchors(self):
        # lower endpoint 0: increasing; 5: inverted-U; 12: decreasing
        cases = {
            0.0: ("increasing", np.linspace(0.5, 60.0, 200)),
            5.0: ("inverted_U", np.linspace(5.05, 60.0, 200)),
            12.0: ("decreasing", np.linspace(12.1, 60.0, 200)),
        }
        for a, (expected, grid) in cases.items():
            family = FosdFamily("uniform3", a=a)
            _, verdict, _ = fosd_experiment(family, grid, theta=1.0)
            assert verdict.classification == expected, (a, verdict)


class TestFigure2:
    def test_surface_structure(self):
        alphas = np.geomspace(8.0, 1.1, 30)
        cells = figure2_surface([1.0, 2.0], [0.5, 1.0], alphas)
        assert len(cells) == 2 * 2 * 30
        assert all(c.status == "ok" for c in cells)
        # mean increases as alpha descends toward 1, for each (x_m, theta)
        first_block = [c for c in cells if c.x_m == 1.0 and c.theta == 0.5]
        means = [c.d_bar_U for c in first_block]
        assert all(a < b for a, b in zip(means, means[1:]))

    def test_large_alpha_approaches_degenerate(self):
        cells = figure2_surface([1.0], [1.0], [200.0])
        degenerate_f = f_large(LargeMarketSpec(theta=1.0, G=Degenerate(1.0)))
        assert cells[0].f == pytest.approx(degenerate_f, abs=5e-3)

    def test_quadrature_reevaluation_agreement(self):
        # independent high-precision re-evaluation of one fixed row
        import mpmath as mp

        mp.mp.dps = 30
        alpha, x_m, theta = 4.0, 1.0, 1.0
        cell = figure2_surface([x_m], [theta], [alpha])[0]
        from matchnet.large_market import phi

        s = phi(cell.d_bar_U, theta)
        reference = 1.0 - float(
            alpha * (x_m * s) ** alpha * mp.gammainc(-alpha, x_m * s, mp.inf)
        )
        assert cell.f == pytest.approx(reference, abs=1e-8)

    def test_bad_cells_are_recorded_not_fatal(self):
        cells = figure2_surface([1.0], [1.0], [0.9])  # alpha <= 1 is invalid
        assert cells[0].status == "DomainError"
        assert np.isnan(cells[0].f)


class TestMpsBattery:
    def test_catalog_verifies_and_orders(self):
        catalog = default_mps_catalog()
        distinct = {(repr(b), repr(s)) for ps in catalog.values() for b, s in ps}
        assert len(distinct) >= 6
        for variant, pairs in catalog.items():
            verdicts = mps_battery(pairs, variant, (0.5, 1.0, 2.0))
            assert all(v.passed for v in verdicts), variant
            if variant != "prop9":
                assert min(v.min_margin for v in verdicts) >= 1e-8

    def test_unverified_pair_rejected(self):
        bad_pair = (Uniform(0.0, 4.0), Uniform(1.0, 3.0))  # reversed direction
        with pytest.raises(DomainError):
            mps_battery([bad_pair], "theorem2", (1.0,))

    def test_prop9_weak_ordering_detail(self):
        pairs = [(Degenerate(2.0), TwoPointMixture((1.0, 3.0), (0.5, 0.5)))]
        verdicts = mps_battery(pairs, "prop9", (0.5, 1.0, 2.0), G=Degenerate(2.0))
        assert verdicts[0].passed
        assert all(m >= -1e-12 for m in verdicts[0].margins)

    def test_prop11_strict_drop(self):
        pairs = [(Degenerate(2.0), Exponential(2.0))]
        verdicts = mps_battery(pairs, "prop11", (1.0,))
        assert verdicts[0].passed and verdicts[0].min_margin > 0


class TestScaling:
    def test_sign_pattern(self):
        result = scaling_experiment(Exponential(1.0), (0.5, 1.0, 2.0), theta=1.0)
        assert result.sign_pattern_ok
        by_rho = {row.param: row.f for row in result.rows}
        assert by_rho[0.5] < by_rho[1.0] < by_rho[2.0]

    def test_pareto_same_pattern(self):
        result = scaling_experiment(Pareto(1.0, 2.0), (0.5, 1.0, 2.0), theta=1.0)
        assert result.sign_pattern_ok

    def test_one_sided_grid_rejected(self):
        with pytest.raises(DomainError):
            scaling_experiment(Exponential(1.0), (1.0, 2.0), theta=1.0)


class TestCesProbe:
    def test_self_consistency_recovers_gamma(self):
        thetas = (0.25, 0.5, 1.0, 2.0, 4.0)
        observations = [(ces_scaling_dbar(t, 0.7), t) for t in thetas]
        grid = np.round(np.arange(0.5, 1.01, 0.01), 10)
        result = ces_condition_probe(observations, grid)
        assert result.best_gamma == pytest.approx(0.7, abs=0.011)
        best = min(result.residuals, key=lambda r: r.mean_squared_residual)
        assert best.mean_squared_residual <= 1e-10

    def test_gross_violation_leaves_large_residuals(self):
        observations = [(2.0, t) for t in (0.25, 0.5, 1.0, 2.0, 4.0)]
        result = ces_condition_probe(observations, (0.5, 0.7, 1.0))
        assert all(r.mean_squared_residual > 0.1 for r in result.residuals)

    def test_single_observation_flagged(self):
        result = ces_condition_probe([(2.0, 1.0)], (0.5, 1.0))
        assert result.degenerate_fit

    def test_domain_violations_excluded_with_count(self):
        # gamma = 3 at small theta lands outside the scaling domain
        observations = [(1.0, 0.05), (1.0, 1.0)]
        result = ces_condition_probe(observations, (3.0,))
        row = result.residuals[0]
        assert row.n_excluded == 1 and row.n_used == 1


class TestCsvRendering:
    def test_float_format_17_digits(self):
        assert format_float(1.0) == "1"
        assert format_float(0.1) == "0.10000000000000001"

    def test_sweep_csv_shape(self):
        family = FosdFamily("degenerate")
        rows, _, _ = fosd_experiment(family, [1.0, 2.0], theta=1.0)
        text = sweep_rows_to_csv(rows)
        lines = text.splitlines()
        assert lines[0] == "param,d_bar_U,gini,f,theta"
        assert len(lines) == 3
        assert text.endswith("\n")

    def test_surface_csv_has_status_column(self):
        cells = figure2_surface([1.0], [1.0], [2.0])
        lines = surface_to_csv(cells).splitlines()
        assert lines[0].endswith(",status")
        assert lines[1].endswith(",ok")
