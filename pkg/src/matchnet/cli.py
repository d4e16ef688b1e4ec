"""Config-driven command-line interface.

Every run is a pure function of (config file, seed): JSON output is
byte-identical across re-runs and worker counts. Configs are single JSON
documents holding the whole run; --seed, --workers, --out, and --format
override the matching config fields.

Exit codes: 0 ok, 1 validation failure, 2 config error, 3 numeric-domain
error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from matchnet import experiments, intensity, simulator
from matchnet.errors import MatchnetError
from matchnet.intensity import FosdFamily, model_from_json
from matchnet.large_market import (
    LargeMarketSpec,
    ces_f,
    ces_scaling_dbar,
    chi_locations,
    f_abundant,
    f_dense,
    f_large,
    f_locations_large,
    f_taylor_series,
    frictionless_f,
    q_large,
)
from matchnet.simulator import LargeMarketRecipe, SimConfig
from matchnet.small_market import FiniteMarketSpec

EXIT_OK = 0
EXIT_VALIDATION_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERIC_ERROR = 3


class ConfigError(Exception):
    """Config file violates the schema; message names the offending key."""


# ---------------------------------------------------------------------------
# Schema helpers


def _require_keys(obj: dict, where: str, required: dict, optional: dict = {}):
    """Validate presence and types; reject unknown keys by name."""
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected object")
    allowed = set(required) | set(optional)
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{where}.{key}: unknown key (allowed: {sorted(allowed)})")
    out = {}
    for key, kind in required.items():
        if key not in obj:
            raise ConfigError(f"{where}.{key}: missing (expected {kind.__name__})")
        out[key] = _coerce(obj[key], kind, f"{where}.{key}")
    for key, kind in optional.items():
        if key in obj:
            out[key] = _coerce(obj[key], kind, f"{where}.{key}")
    return out


def _coerce(value, kind, where: str):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected number, got {type(value).__name__}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected integer, got {type(value).__name__}")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected string, got {type(value).__name__}")
        return value
    if kind is list:
        if not isinstance(value, list):
            raise ConfigError(f"{where}: expected array, got {type(value).__name__}")
        return value
    if kind is dict:
        if not isinstance(value, dict):
            raise ConfigError(f"{where}: expected object, got {type(value).__name__}")
        return value
    raise AssertionError(f"unhandled schema type {kind}")


def _model_slot(model_section: dict, slot: str):
    if slot not in model_section:
        raise ConfigError(f"model.{slot}: missing (expected intensity model object)")
    try:
        return model_from_json(model_section[slot])
    except MatchnetError as exc:
        raise ConfigError(f"model.{slot}: {exc}")


def _float_list(values, where: str) -> list[float]:
    out = []
    for i, value in enumerate(values):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}[{i}]: expected number")
        out.append(float(value))
    return out


# ---------------------------------------------------------------------------
# eval


_EVAL_COMMANDS = (
    "f_large",
    "q_large",
    "f_locations",
    "frictionless",
    "taylor",
    "dense",
    "abundant",
    "ces",
)


def cmd_eval(config: dict) -> dict:
    top = _require_keys(
        config,
        "config",
        {"command": str},
        {"market": dict, "model": dict, "options": dict, "output_path": str},
    )
    command = top["command"]
    if command not in _EVAL_COMMANDS:
        raise ConfigError(f"config.command: expected one of {_EVAL_COMMANDS}")
    market = top.get("market", {})
    model_section = top.get("model", {})
    options = top.get("options", {})
    error_budget = 0.0

    if command == "frictionless":
        fields = _require_keys(market, "market", {"theta": float})
        value = frictionless_f(fields["theta"])
    elif command == "ces":
        fields = _require_keys(market, "market", {"theta": float})
        opts = _require_keys(options, "options", {"gamma": float})
        value = ces_f(fields["theta"], opts["gamma"])
    elif command == "abundant":
        opts = _require_keys(options, "options", {"d_bar_U": float})
        G = _model_slot(model_section, "G")
        value = f_abundant(intensity.normalized(G), opts["d_bar_U"])
        error_budget = _quadrature_budget(G)
    else:
        fields = _require_keys(market, "market", {"theta": float})
        theta = fields["theta"]
        if command == "f_large":
            G = _model_slot(model_section, "G")
            value = f_large(LargeMarketSpec(theta=theta, G=G))
            error_budget = _quadrature_budget(G)
        elif command == "q_large":
            Ghat = _model_slot(model_section, "Ghat")
            value = q_large(LargeMarketSpec(theta=theta, Ghat=Ghat))
            error_budget = _quadrature_budget(Ghat)
        elif command == "f_locations":
            G = _model_slot(model_section, "G")
            H = _model_slot(model_section, "H")
            spec = LargeMarketSpec(theta=theta, G=G, H=H)
            value = f_locations_large(spec)
            _, truncated = chi_locations(H, intensity.mean(G), theta)
            error_budget = _quadrature_budget(G) + truncated
        elif command == "dense":
            G = _model_slot(model_section, "G")
            value = f_dense(intensity.normalized(G), theta)
            error_budget = _quadrature_budget(G)
        else:  # taylor
            opts = _require_keys(options, "options", {"order": int})
            G = _model_slot(model_section, "G")
            value = f_taylor_series(G, theta, opts["order"])
    return {"command": command, "value": value, "error_budget": error_budget}


def _quadrature_budget(model) -> float:
    # The Pareto mgf is the one evaluator without a closed form.
    return 1e-8 if isinstance(model, intensity.Pareto) else 0.0


# ---------------------------------------------------------------------------
# simulate


def _parse_market(market: dict, model_section: dict):
    kind = market.get("kind")
    if kind == "finite":
        fields = _require_keys(
            market, "market", {"kind": str, "U": int, "side": str}, {"V": int, "p": list}
        )
        p = _float_list(fields.get("p", []), "market.p")
        if fields["side"] == "applicant":
            if "V" not in fields:
                raise ConfigError("market.V: missing (expected integer)")
            return FiniteMarketSpec.applicant_market(np.asarray(p), fields["V"])
        if fields["side"] == "vacancy":
            return FiniteMarketSpec.vacancy_market(np.asarray(p), fields["U"])
        raise ConfigError("market.side: expected 'applicant' or 'vacancy'")
    if kind == "finite_locations":
        fields = _require_keys(
            market, "market", {"kind": str, "p": list, "v": list}
        )
        p = _float_list(fields["p"], "market.p")
        v = fields["v"]
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
            raise ConfigError("market.v: expected array of integers")
        return FiniteMarketSpec.locations_market(np.asarray(p), v)
    if kind == "frictionless":
        fields = _require_keys(market, "market", {"kind": str, "U": int, "theta": float})
        return simulator.frictionless_market(fields["U"], fields["theta"])
    if kind == "large":
        fields = _require_keys(market, "market", {"kind": str, "U": int, "theta": float})
        slots = set(model_section)
        if slots == {"G"}:
            return LargeMarketRecipe(
                U=fields["U"], theta=fields["theta"], G=_model_slot(model_section, "G")
            )
        if slots == {"Ghat"}:
            return LargeMarketRecipe(
                U=fields["U"],
                theta=fields["theta"],
                Ghat=_model_slot(model_section, "Ghat"),
            )
        if slots == {"G", "H"}:
            return LargeMarketRecipe(
                U=fields["U"],
                theta=fields["theta"],
                G=_model_slot(model_section, "G"),
                H=_model_slot(model_section, "H"),
            )
        raise ConfigError("model: large markets need slots G, Ghat, or G and H")
    raise ConfigError(
        "market.kind: expected one of ['finite', 'finite_locations', 'frictionless', 'large']"
    )


def cmd_simulate(config: dict, seed_override=None, workers_override=None) -> dict:
    top = _require_keys(
        config,
        "config",
        {"command": str, "market": dict, "options": dict},
        {"model": dict, "output_path": str},
    )
    command = top["command"]
    if command not in ("estimate_f", "estimate_q"):
        raise ConfigError("config.command: expected 'estimate_f' or 'estimate_q'")
    options = _require_keys(
        top["options"],
        "options",
        {"protocol": str, "replications": int, "seed": int},
        {"workers": int},
    )
    market = _parse_market(top["market"], top.get("model", {}))
    sim_config = SimConfig(
        market=market,
        protocol=options["protocol"],
        replications=options["replications"],
        seed=seed_override if seed_override is not None else options["seed"],
        workers=workers_override if workers_override is not None else options.get("workers", 1),
    )
    estimate = (
        simulator.estimate_f(sim_config)
        if command == "estimate_f"
        else simulator.estimate_q(sim_config)
    )
    return {
        "command": command,
        "estimate": estimate.estimate,
        "std_error": estimate.std_error,
        "n_observations": estimate.n_observations,
        "clamp_rate": estimate.clamp_rate,
        "seed": estimate.seed,
    }


# ---------------------------------------------------------------------------
# sweep


_SWEEP_COMMANDS = ("fosd", "table1", "figure2", "scaling", "ces_probe")


def cmd_sweep(config: dict, out_path: Path) -> dict:
    top = _require_keys(
        config,
        "config",
        {"command": str, "options": dict},
        {"model": dict, "market": dict, "output_path": str},
    )
    command = top["command"]
    options = top["options"]
    if command == "fosd":
        opts = _require_keys(
            options,
            "options",
            {"family": str, "grid": list, "theta": float},
            {"shape": float, "x_m": float, "width": float, "a": float},
        )
        family = FosdFamily(
            family=opts["family"],
            shape=opts.get("shape"),
            x_m=opts.get("x_m"),
            width=opts.get("width"),
            a=opts.get("a"),
        )
        grid = _float_list(opts["grid"], "options.grid")
        rows, verdict, gini_trend = experiments.fosd_experiment(
            family, grid, opts["theta"]
        )
        csv_text = experiments.sweep_rows_to_csv(rows)
        verdict_obj = {
            "command": command,
            "family": opts["family"],
            "shape": verdict.classification,
            "argmax_param": verdict.argmax_param,
            "margin": verdict.margin,
            "gini_trend": gini_trend,
        }
    elif command == "table1":
        opts = _require_keys(options, "options", {}, {"theta": float, "n_points": int})
        results = experiments.table1_preset(
            theta=opts.get("theta", 1.0), n_points=opts.get("n_points", 200)
        )
        chunks = []
        for i, (name, result) in enumerate(results.items()):
            text = experiments.sweep_rows_to_csv(
                result["rows"], extra_first_column=("family", name)
            )
            chunks.append(text if i == 0 else text.split("\n", 1)[1])
        csv_text = "".join(chunks)
        verdict_obj = {
            "command": command,
            "families": {
                name: {
                    "shape": r["verdict"].classification,
                    "gini_trend": r["gini_trend"],
                    "expected": [r["expected_shape"], r["expected_gini_trend"]],
                    "matches": r["matches"],
                }
                for name, r in results.items()
            },
            "all_match": all(r["matches"] for r in results.values()),
        }
    elif command == "figure2":
        opts = _require_keys(
            options, "options", {"x_m": list, "theta": list, "alpha": list}
        )
        cells = experiments.figure2_surface(
            _float_list(opts["x_m"], "options.x_m"),
            _float_list(opts["theta"], "options.theta"),
            _float_list(opts["alpha"], "options.alpha"),
        )
        csv_text = experiments.surface_to_csv(cells)
        failures = [c for c in cells if c.status != "ok"]
        verdict_obj = {
            "command": command,
            "cells": len(cells),
            "failed_cells": len(failures),
        }
    elif command == "scaling":
        opts = _require_keys(options, "options", {"rho": list, "theta": float})
        G = _model_slot(top.get("model", {}), "G")
        result = experiments.scaling_experiment(
            G, _float_list(opts["rho"], "options.rho"), opts["theta"]
        )
        csv_text = experiments.sweep_rows_to_csv(result.rows)
        verdict_obj = {"command": command, "sign_pattern_ok": result.sign_pattern_ok}
    elif command == "ces_probe":
        opts = _require_keys(options, "options", {"observations": list, "gamma": list})
        observations = []
        for i, pair in enumerate(opts["observations"]):
            if not isinstance(pair, list) or len(pair) != 2:
                raise ConfigError(
                    f"options.observations[{i}]: expected [d_bar_U, theta] pair"
                )
            observations.append(tuple(_float_list(pair, f"options.observations[{i}]")))
        result = experiments.ces_condition_probe(
            observations, _float_list(opts["gamma"], "options.gamma")
        )
        lines = ["gamma,mean_squared_residual,n_used,n_excluded"]
        for row in result.residuals:
            lines.append(
                ",".join(
                    (
                        experiments.format_float(row.gamma),
                        experiments.format_float(row.mean_squared_residual),
                        str(row.n_used),
                        str(row.n_excluded),
                    )
                )
            )
        csv_text = "\n".join(lines) + "\n"
        verdict_obj = {
            "command": command,
            "best_gamma": result.best_gamma,
            "degenerate_fit": result.degenerate_fit,
        }
    else:
        raise ConfigError(f"config.command: expected one of {_SWEEP_COMMANDS}")

    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(csv_text, newline="")
    verdict_path = out_path.with_suffix(".verdict.json")
    verdict_path.write_text(_render_json(verdict_obj) + "\n")
    return {
        "command": command,
        "csv": str(out_path),
        "verdict": str(verdict_path),
        "status": "ok",
    }


# ---------------------------------------------------------------------------
# validate


def cmd_validate(config: dict) -> tuple[dict, int]:
    from matchnet import validation  # heavy import kept off the fast paths

    top = _require_keys(
        config, "config", {"command": str}, {"options": dict, "output_path": str}
    )
    suite = top["command"]
    if suite not in ("oracle", "analytic", "simulation", "all"):
        raise ConfigError(
            "config.command: expected one of ['oracle', 'analytic', 'simulation', 'all']"
        )
    results = validation.run_suite(suite)
    failures = [r.name for r in results if not r.passed]
    report = {
        "suite": suite,
        "passed": not failures,
        "failures": failures,
        "checks": [dataclasses.asdict(r) for r in results],
    }
    return report, EXIT_OK if not failures else EXIT_VALIDATION_FAILURE


# ---------------------------------------------------------------------------
# Entry point


def _render_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config file unreadable: {exc}")
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}")
    if not isinstance(config, dict):
        raise ConfigError("config: expected a top-level object")
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matchnet",
        description="Matching probabilities on random application networks",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, desc in (
        ("eval", "evaluate a closed-form quantity"),
        ("simulate", "run the seeded Monte Carlo estimator"),
        ("sweep", "run a comparative-statics sweep writing CSV + verdict"),
        ("validate", "run a validation suite"),
    ):
        p = sub.add_parser(name, help=desc)
        p.add_argument("--config", required=True, help="path to the run's JSON config")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument(
            "--workers", type=int, default=None, help="override config workers"
        )
        p.add_argument("--out", default=None, help="output path")
        p.add_argument(
            "--format", choices=("csv", "json"), default="json", help="output format"
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args.config)
        if args.subcommand == "eval":
            if args.format != "json":
                raise ConfigError("--format: eval emits json only")
            report = cmd_eval(config)
            code = EXIT_OK
        elif args.subcommand == "simulate":
            if args.format != "json":
                raise ConfigError("--format: simulate emits json only")
            report = cmd_simulate(
                config, seed_override=args.seed, workers_override=args.workers
            )
            code = EXIT_OK
        elif args.subcommand == "sweep":
            out = args.out or config.get("output_path")
            if not isinstance(out, str) or not out:
                raise ConfigError(
                    "output_path: missing (expected string; or pass --out)"
                )
            report = cmd_sweep(config, Path(out))
            code = EXIT_OK
        else:
            if args.format != "json":
                raise ConfigError("--format: validate emits json only")
            report, code = cmd_validate(config)
    except ConfigError as exc:
        print(_render_json({"error": "config", "message": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except MatchnetError as exc:
        print(
            _render_json(
                {"error": type(exc).__name__, "message": str(exc)}
            ),
            file=sys.stderr,
        )
        return EXIT_NUMERIC_ERROR
    output = _render_json(report)
    if args.subcommand != "sweep" and args.out:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(output + "\n")
    print(output)
    return code


if __name__ == "__main__":
    sys.exit(main())
