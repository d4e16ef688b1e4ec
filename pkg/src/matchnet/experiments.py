"""Comparative-statics harness over the large-market formulas.

Analytic sweeps only: first-order dominance sweeps with Gini tracking,
the Pareto surface, mean-preserving-spread batteries, proportional
scaling, and the CES scaling-condition probe. Everything is seed-free and
emits plain rows suitable for CSV output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from matchnet import intensity
from matchnet.errors import DomainError, MatchnetError
from matchnet.intensity import (
    Degenerate,
    FosdFamily,
    Gamma,
    IntensityModel,
    TwoPointMixture,
    Uniform,
    fosd_sweep,
    mps_pair,
    verify_sosd,
)
from matchnet.large_market import (
    LargeMarketSpec,
    ces_scaling_dbar,
    f_large,
    f_locations_large,
    q_large,
)

_SHAPE_MARGIN = 1e-6
_GINI_SPREAD_TOL = 1e-9


@dataclass(frozen=True)
class SweepRow:
    param: float
    d_bar_U: float
    gini: float
    f: float
    theta: float


@dataclass(frozen=True)
class ShapeVerdict:
    """Margin-based classification of f along a sweep of increasing means."""

    classification: str  # increasing | decreasing | inverted_U | inconclusive
    argmax_param: float | None
    margin: float


def classify_shape(params, values, margin: float = _SHAPE_MARGIN) -> ShapeVerdict:
    values = [float(v) for v in values]
    params = [float(p) for p in params]
    if len(values) < 3:
        return ShapeVerdict("inconclusive", None, 0.0)
    peak = max(range(len(values)), key=values.__getitem__)
    interior_peak = 0 < peak < len(values) - 1
    rise = values[peak] - values[0]
    fall = values[peak] - values[-1]
    diffs = [b - a for a, b in zip(values, values[1:])]
    if interior_peak and rise >= margin and fall >= margin:
        return ShapeVerdict("inverted_U", params[peak], min(rise, fall))
    if values[-1] - values[0] >= margin and all(d > -margin for d in diffs):
        return ShapeVerdict("increasing", None, values[-1] - values[0])
    if values[0] - values[-1] >= margin and all(d < margin for d in diffs):
        return ShapeVerdict("decreasing", None, values[0] - values[-1])
    return ShapeVerdict("inconclusive", None, 0.0)


def classify_trend(values, spread_tol: float = _GINI_SPREAD_TOL) -> str:
    values = [float(v) for v in values]
    if max(values) - min(values) < spread_tol:
        return "constant"
    diffs = [b - a for a, b in zip(values, values[1:])]
    if all(d >= -spread_tol for d in diffs):
        return "increasing"
    if all(d <= spread_tol for d in diffs):
        return "decreasing"
    return "inconclusive"


def fosd_experiment(
    family: FosdFamily, grid, theta: float
) -> tuple[list[SweepRow], ShapeVerdict, str]:
    """Evaluate f along a verified FOSD sweep and classify its shape."""
    models = fosd_sweep(family, grid)
    rows = []
    for param, model in zip(grid, models):
        rows.append(
            SweepRow(
                param=float(param),
                d_bar_U=intensity.mean(model),
                gini=intensity.gini(model),
                f=f_large(LargeMarketSpec(theta=theta, G=model)),
                theta=theta,
            )
        )
    verdict = classify_shape([r.param for r in rows], [r.f for r in rows])
    gini_trend = classify_trend([r.gini for r in rows])
    return rows, verdict, gini_trend


# ---------------------------------------------------------------------------
# Table-style presets: the six parametric sweeps at a common tightness


def table1_preset(theta: float = 1.0, n_points: int = 200) -> dict[str, dict]:
    """Six family sweeps with their expected shape and Gini trends."""

    def linspace(lo, hi):
        return [lo + (hi - lo) * i / (n_points - 1) for i in range(n_points)]

    cases = {
        "degenerate": (
            FosdFamily("degenerate"),
            linspace(0.5, 20.0),
            ("increasing", "constant"),
        ),
        "gamma": (
            FosdFamily("gamma", shape=2.0),
            linspace(0.5, 20.0),
            ("increasing", "constant"),
        ),
        "pareto": (
            FosdFamily("pareto", x_m=1.0),
            # Shape grid descending toward 1 sweeps the mean upward.
            [8.0 * (1.05 / 8.0) ** (i / (n_points - 1)) for i in range(n_points)],
            ("inverted_U", "increasing"),
        ),
        "uniform1": (
            FosdFamily("uniform1"),
            linspace(0.5, 20.0),
            ("increasing", "constant"),
        ),
        "uniform2": (
            FosdFamily("uniform2", width=1.0),
            linspace(0.6, 20.0),
            ("increasing", "decreasing"),
        ),
        "uniform3": (
            FosdFamily("uniform3", a=5.0),
            linspace(5.05, 60.0),
            ("inverted_U", "increasing"),
        ),
    }
    out = {}
    for name, (family, grid, expected) in cases.items():
        rows, verdict, gini_trend = fosd_experiment(family, grid, theta)
        out[name] = {
            "rows": rows,
            "verdict": verdict,
            "gini_trend": gini_trend,
            "expected_shape": expected[0],
            "expected_gini_trend": expected[1],
            "matches": verdict.classification == expected[0]
            and gini_trend == expected[1],
        }
    return out


# ---------------------------------------------------------------------------
# Pareto surface


@dataclass(frozen=True)
class SurfaceCell:
    x_m: float
    theta: float
    alpha: float
    d_bar_U: float
    f: float
    status: str


def figure2_surface(x_m_values, theta_values, alpha_grid) -> list[SurfaceCell]:
    """Full factorial Pareto evaluation; per-cell failures are recorded."""
    cells = []
    for x_m in x_m_values:
        for theta in theta_values:
            for alpha in alpha_grid:
                try:
                    model = intensity.Pareto(float(x_m), float(alpha))
                    cells.append(
                        SurfaceCell(
                            x_m=float(x_m),
                            theta=float(theta),
                            alpha=float(alpha),
                            d_bar_U=intensity.mean(model),
                            f=f_large(LargeMarketSpec(theta=float(theta), G=model)),
                            status="ok",
                        )
                    )
                except MatchnetError as exc:
                    cells.append(
                        SurfaceCell(
                            x_m=float(x_m),
                            theta=float(theta),
                            alpha=float(alpha),
                            d_bar_U=float("nan"),
                            f=float("nan"),
                            status=type(exc).__name__,
                        )
                    )
    return cells


# ---------------------------------------------------------------------------
# Mean-preserving-spread batteries


@dataclass(frozen=True)
class PairVerdict:
    base: IntensityModel
    spread: IntensityModel
    variant: str
    margins: tuple[float, ...]  # f(base) - f(spread) per theta
    passed: bool

    @property
    def min_margin(self) -> float:
        return min(self.margins)


def mps_battery(
    pairs,
    variant: str,
    thetas,
    *,
    H: IntensityModel | None = None,
    G: IntensityModel | None = None,
) -> list[PairVerdict]:
    """Ordering checks for verified spread pairs.

    theorem2: strict drop of f under a spread of G; prop8: same with
    locations (fixed H); prop9: weak drop under a spread of H (fixed G);
    prop11: strict drop of q under a spread of Ghat.
    """
    if variant not in ("theorem2", "prop8", "prop9", "prop11"):
        raise DomainError(f"unknown battery variant {variant!r}")
    verdicts = []
    for base, spread in pairs:
        report = verify_sosd(base, spread)
        if not report.passed:
            raise DomainError(
                f"pair ({base!r}, {spread!r}) is not a verified spread: {report!r}"
            )
        margins = []
        for theta in thetas:
            theta = float(theta)
            if variant == "theorem2":
                hi = f_large(LargeMarketSpec(theta=theta, G=base))
                lo = f_large(LargeMarketSpec(theta=theta, G=spread))
            elif variant == "prop8":
                h_model = H if H is not None else Degenerate(2.0)
                hi = f_locations_large(LargeMarketSpec(theta=theta, G=base, H=h_model))
                lo = f_locations_large(
                    LargeMarketSpec(theta=theta, G=spread, H=h_model)
                )
            elif variant == "prop9":
                g_model = G if G is not None else Degenerate(2.0)
                hi = f_locations_large(LargeMarketSpec(theta=theta, G=g_model, H=base))
                lo = f_locations_large(
                    LargeMarketSpec(theta=theta, G=g_model, H=spread)
                )
            else:
                hi = q_large(LargeMarketSpec(theta=theta, Ghat=base))
                lo = q_large(LargeMarketSpec(theta=theta, Ghat=spread))
            margins.append(hi - lo)
        if variant == "prop9":
            passed = all(m >= -1e-12 for m in margins)
        else:
            passed = all(m > 0.0 for m in margins)
        verdicts.append(
            PairVerdict(
                base=base,
                spread=spread,
                variant=variant,
                margins=tuple(margins),
                passed=passed,
            )
        )
    return verdicts


def default_mps_catalog() -> dict[str, list[tuple[IntensityModel, IntensityModel]]]:
    """Shipped machine-verified spread pairs for the ordering batteries."""
    theorem2 = [
        mps_pair(Degenerate(2.0), "two_point_spread", epsilon=1.0),
        mps_pair(Degenerate(1.5), "two_point_spread", epsilon=1.0),
        mps_pair(Gamma(4.0, 3.0), "gamma_shape_drop", new_shape=1.0),
        mps_pair(Gamma(2.0, 2.0), "gamma_shape_drop", new_shape=0.5),
        mps_pair(Uniform(1.0, 3.0), "uniform_widen", new_width=4.0),
        mps_pair(Uniform(2.0, 4.0), "uniform_widen", new_width=5.0),
    ]
    prop9 = [
        (Degenerate(2.0), TwoPointMixture((1.0, 3.0), (0.5, 0.5))),
        (Degenerate(3.0), TwoPointMixture((1.0, 5.0), (0.5, 0.5))),
    ]
    for base, spread in prop9:
        report = verify_sosd(base, spread)
        if not report.passed:
            raise DomainError(f"catalog pair failed verification: {report!r}")
    prop11 = [
        (Degenerate(2.0), intensity.Exponential(2.0)),
        (Gamma(4.0, 2.0), Gamma(1.0, 2.0)),
    ]
    for base, spread in prop11:
        report = verify_sosd(base, spread)
        if not report.passed:
            raise DomainError(f"catalog pair failed verification: {report!r}")
    return {
        "theorem2": theorem2,
        "prop8": theorem2,
        "prop9": prop9,
        "prop11": prop11,
    }


# ---------------------------------------------------------------------------
# Proportional scaling


@dataclass(frozen=True)
class ScalingVerdict:
    rows: tuple[SweepRow, ...]
    sign_pattern_ok: bool


def scaling_experiment(G: IntensityModel, rho_grid, theta: float) -> ScalingVerdict:
    """Check sign(f(rho) - f(1)) == sign(rho - 1) along a scaling grid."""
    rhos = [float(r) for r in rho_grid]
    if not any(r < 1 for r in rhos) or not any(r > 1 for r in rhos):
        raise DomainError("rho grid must span both sides of 1")
    baseline = f_large(LargeMarketSpec(theta=theta, G=G))
    rows = []
    ok = True
    for rho in sorted(rhos):
        scaled = intensity.scale_model(G, rho)
        f = f_large(LargeMarketSpec(theta=theta, G=scaled))
        rows.append(
            SweepRow(
                param=rho,
                d_bar_U=intensity.mean(scaled),
                gini=intensity.gini(scaled),
                f=f,
                theta=theta,
            )
        )
        gap = f - baseline
        if rho > 1 and gap <= 0:
            ok = False
        if rho < 1 and gap >= 0:
            ok = False
        if rho == 1 and gap != 0:
            ok = False
    return ScalingVerdict(rows=tuple(rows), sign_pattern_ok=ok)


# ---------------------------------------------------------------------------
# CES scaling-condition probe


@dataclass(frozen=True)
class GammaResidual:
    gamma: float
    mean_squared_residual: float
    n_used: int
    n_excluded: int


@dataclass(frozen=True)
class CesProbeResult:
    residuals: tuple[GammaResidual, ...]
    best_gamma: float | None
    degenerate_fit: bool


def ces_condition_probe(observations, gamma_grid) -> CesProbeResult:
    """Residuals of observed mean intensities against the CES scaling curve.

    Each observation is a (d_bar_U, theta) pair; for every gamma in the
    grid the residual is d_bar_U - scaling(theta, gamma). Observations
    outside a gamma's domain are excluded from that gamma's summary with a
    count.
    """
    obs = [(float(d), float(t)) for d, t in observations]
    if not obs:
        raise DomainError("probe needs at least one observation")
    if any(d <= 0 or t <= 0 for d, t in obs):
        raise DomainError("observations must be positive")
    rows = []
    for gamma in gamma_grid:
        gamma = float(gamma)
        sq = []
        excluded = 0
        for d_bar_U, theta in obs:
            try:
                sq.append((d_bar_U - ces_scaling_dbar(theta, gamma)) ** 2)
            except DomainError:
                excluded += 1
        rows.append(
            GammaResidual(
                gamma=gamma,
                mean_squared_residual=math.fsum(sq) / len(sq) if sq else math.inf,
                n_used=len(sq),
                n_excluded=excluded,
            )
        )
    usable = [r for r in rows if r.n_used > 0]
    best = min(usable, key=lambda r: r.mean_squared_residual).gamma if usable else None
    return CesProbeResult(
        residuals=tuple(rows),
        best_gamma=best,
        degenerate_fit=len(obs) < 2,
    )


# ---------------------------------------------------------------------------
# CSV serialization helpers (consumed by the CLI)

SWEEP_HEADER = ("param", "d_bar_U", "gini", "f", "theta")


def format_float(x: float) -> str:
    """17 significant digits, '.' decimal separator: bit-stable goldens."""
    return format(x, ".17g")


def sweep_rows_to_csv(rows, extra_first_column: tuple[str, str] | None = None) -> str:
    """Render SweepRows with the standard header and '\\n' line endings."""
    header = list(SWEEP_HEADER)
    if extra_first_column is not None:
        header.insert(0, extra_first_column[0])
    lines = [",".join(header)]
    for row in rows:
        fields = [
            format_float(row.param),
            format_float(row.d_bar_U),
            format_float(row.gini),
            format_float(row.f),
            format_float(row.theta),
        ]
        if extra_first_column is not None:
            fields.insert(0, extra_first_column[1])
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def surface_to_csv(cells) -> str:
    lines = [",".join(("x_m", "theta", "alpha", "d_bar_U", "f", "status"))]
    for cell in cells:
        lines.append(
            ",".join(
                (
                    format_float(cell.x_m),
                    format_float(cell.theta),
                    format_float(cell.alpha),
                    format_float(cell.d_bar_U),
                    format_float(cell.f),
                    cell.status,
                )
            )
        )
    return "\n".join(lines) + "\n"
