"""Command-line front end.

Usage: ``python -m afffp <command> [flags]`` with commands ``track``,
``sweep``, ``climbing``, ``vta``, ``disaster`` and ``solve``.

Parameters come from three layers, later ones winning: built-in defaults, a
JSON file given with ``--config``, and command-line flags. The merged set is
validated against the command's JSON schema before anything runs, written
to ``<out>/config.json``, and embedded in every output file. Passing that
file back with ``--config`` reproduces the run.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import experiments, io, tracking
from .benchmarks import DisasterInstance, generate_disaster
from .engine import ALGORITHMS, RunConfig
from .errors import (InputError, InstanceTooLargeError, NumericalDegeneracyError, OutputError,
                     RunFailure)
from .solver import solve_exact

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_OUTPUT = 4
EXIT_RUN = 5

_INT = {"type": "integer", "minimum": 1}
_PROB = {"type": "number", "exclusiveMinimum": 0, "maximum": 1}
_ALGORITHM_SET = {"type": "array", "minItems": 1, "uniqueItems": True,
                  "items": {"enum": list(ALGORITHMS)}}

_SEED = ("seed", {"type": "integer", "minimum": 0, "maximum": 2**64 - 1}, 0)
_LEARNING = [
    ("xi", {"type": "number", "exclusiveMinimum": 0}, 1.0),
    ("z", {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}, 0.1),
    ("gamma", {"type": "number", "minimum": 0}, 1e-4),
    ("lambda0", _PROB, 0.8),
    ("prior_mass", {"type": "number", "exclusiveMinimum": 0}, None),
]

# command -> [(name, schema, default)]; defaults of None mean "depends on --full-scale"
PARAMETERS = {
    "track": [
        _SEED,
        ("opponent", {"enum": [tracking.DRIFT, tracking.JUMP]}, tracking.DRIFT),
        ("algorithm", {"enum": [tracking.AFFFP, tracking.CLASSIC, tracking.GEOMETRIC]}, tracking.AFFFP),
        ("gamma", {"type": "number", "minimum": 0}, 1e-4),
        ("lambda0", _PROB, 0.8),
        ("z", {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}, 0.1),
        ("horizon", _INT, 1000),
        ("period", {"type": "number", "exclusiveMinimum": 0}, 1000.0),
    ],
    "sweep": [
        _SEED,
        ("opponent", {"enum": [tracking.DRIFT, tracking.JUMP]}, tracking.DRIFT),
        ("reps", _INT, 100),
        ("grid", {"enum": ["full", "reduced"]}, "full"),
        ("horizon", _INT, 1000),
        ("period", {"type": "number", "exclusiveMinimum": 0}, 1000.0),
    ],
    "climbing": [
        _SEED,
        ("algorithm", {"enum": list(ALGORITHMS)}, "afffp"),
        ("steps", _INT, 1000),
        ("replications", _INT, None),
        ("threshold", _PROB, 0.9),
        *_LEARNING,
    ],
    "vta": [
        _SEED,
        ("algorithms", _ALGORITHM_SET, ["afffp", "geometric"]),
        ("instances", _INT, None),
        ("steps", _INT, 100),
        ("vehicles", _INT, 30),
        ("targets", _INT, 30),
        *_LEARNING,
    ],
    "disaster": [
        _SEED,
        ("algorithms", _ALGORITHM_SET, ["afffp", "geometric"]),
        ("trials", _INT, None),
        ("ambulances", _INT, 10),
        ("incidents", _INT, 3),
        ("steps", _INT, 200),
        ("exact", {"type": "boolean"}, True),
        *[(n, s, 0.01 if n == "xi" else d) for n, s, d in _LEARNING],
    ],
    "solve": [
        _SEED,
        ("instance", {"type": ["string", "null"]}, None),
        ("ambulances", _INT, 10),
        ("incidents", _INT, 3),
    ],
}

# desk-scale and full-scale repetition counts
SCALE = {
    "climbing": ("replications", 200, 1000),
    "vta": ("instances", 30, 100),
    "disaster": ("trials", 50, 200),
}


def schema(command: str) -> dict:
    props = {name: sch for name, sch, _ in PARAMETERS[command]}
    props["full_scale"] = {"type": "boolean"}
    return {"type": "object", "properties": props, "additionalProperties": False}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _flag_type(sch):
    kind = sch.get("type")
    if kind == "integer":
        return int
    if kind == "number":
        return float
    return str


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="afffp", description="Fictitious play experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for command, params in PARAMETERS.items():
        p = sub.add_parser(command)
        p.add_argument("--out", default="results", help="output directory")
        p.add_argument("--config", help="JSON file with parameter values")
        p.add_argument("--full-scale", dest="full_scale", action="store_true", default=None,
                       help="use the full repetition counts")
        for name, sch, default in params:
            flag = "--" + name.replace("_", "-")
            if sch.get("type") == "boolean":
                p.add_argument(flag, dest=name, action=argparse.BooleanOptionalAction, default=None)
            elif sch is _ALGORITHM_SET:
                p.add_argument(flag, dest=name, nargs="+", choices=ALGORITHMS, default=None)
            elif "enum" in sch:
                p.add_argument(flag, dest=name, choices=sch["enum"], default=None)
            else:
                p.add_argument(flag, dest=name, type=_flag_type(sch), default=None)
        if command == "sweep":
            p.add_argument("--reduced", dest="grid", action="store_const", const="reduced")
    return parser


def resolve_config(command: str, file_values: dict, flag_values: dict) -> dict:
    """Merge defaults, file and flags; validate; fill scale-dependent counts."""
    merged = {name: default for name, _, default in PARAMETERS[command] if default is not None}
    merged.update(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    jsonschema.validate(merged, schema(command))
    if command in SCALE:
        name, desk, full = SCALE[command]
        merged.setdefault(name, full if merged.get("full_scale") else desk)
    merged.setdefault("full_scale", False)
    jsonschema.validate(merged, schema(command))
    return merged


def _run_config(cfg: dict, algorithm: str) -> RunConfig:
    return RunConfig(algorithm=algorithm, steps=cfg["steps"], xi=cfg["xi"], z=cfg["z"],
                     gamma=cfg["gamma"], lambda0=cfg["lambda0"], seed=cfg["seed"],
                     prior_mass=cfg.get("prior_mass"))


def _opponent(cfg: dict) -> tracking.ScriptedOpponent:
    if cfg["opponent"] == tracking.DRIFT:
        return tracking.ScriptedOpponent.drift(cfg["period"], cfg["horizon"])
    h = cfg["horizon"]
    return tracking.ScriptedOpponent.jump(h, boundaries=(h // 4 + 1, h - h // 4 + 1))


def run_track(cfg, out):
    est = tracking.EstimatorConfig(cfg["algorithm"], cfg["lambda0"], cfg["gamma"], z=cfg["z"])
    result = tracking.run_tracking(_opponent(cfg), est, cfg["seed"])
    io.write_csv(out / "track.csv", result.to_csv(), cfg)
    io.write_json(out / "summary.json", {"mse": result.mse}, cfg)
    return f"track {cfg['opponent']} {cfg['algorithm']}: mse {result.mse:.6g}"


def run_sweep(cfg, out):
    if cfg["grid"] == "reduced":
        grid = tracking.SweepGrid.reduced(cfg["reps"])
    else:
        grid = tracking.SweepGrid(repetitions=cfg["reps"])
    result = tracking.run_sweep(grid, _opponent(cfg), cfg["seed"])
    io.write_csv(out / "sweep_mse.csv", result.to_csv(), cfg)
    g, l = result.argmin()
    io.write_json(out / "summary.json", {
        "grid": grid.to_dict(), "argmin_gamma": g, "argmin_lambda0": l,
        "min_mse": float(np.nanmin(result.mse)), "classic_mse": result.classic_mse,
        "degenerate_cells": result.degenerate_cells,
    }, cfg)
    return (f"sweep {cfg['opponent']} {len(grid.gammas)}x{len(grid.lambda0s)}: "
            f"min mse {np.nanmin(result.mse):.6g} at gamma={g:.3g}, lambda0={l:.3g}")


def run_climbing(cfg, out):
    result = experiments.climbing_experiment(_run_config(cfg, cfg["algorithm"]),
                                             cfg["replications"], cfg["threshold"])
    lines = ["replication,mean_payoff,equilibrium_step"]
    for r, (m, s) in enumerate(zip(result.mean_payoffs, result.equilibrium_first_steps)):
        lines.append(f"{r},{float(m)!r},{'' if s is None else s}")
    io.write_csv(out / "replications.csv", "\n".join(lines) + "\n", cfg)
    io.write_json(out / "summary.json", result.summary(), cfg)
    return (f"climbing {cfg['algorithm']}: overall mean payoff {result.overall_mean:.4f} "
            f"over {cfg['replications']} replications")


def run_vta(cfg, out):
    configs = [_run_config(cfg, a) for a in cfg["algorithms"]]
    result = experiments.vta_experiment(configs, cfg["instances"], cfg["vehicles"],
                                        cfg["targets"], cfg["seed"])
    algs = list(result.normalized)
    curves = np.stack([result.mean_curve(a) for a in algs], axis=1)
    lines = [",".join(["step"] + [f"{a}_normalized" for a in algs])]
    lines += [",".join([str(t + 1)] + [repr(float(x)) for x in row]) for t, row in enumerate(curves)]
    io.write_csv(out / "vta_curves.csv", "\n".join(lines) + "\n", cfg)
    io.write_json(out / "summary.json", result.summary(), cfg)
    parts = [f"{a} final {result.final_mean(a):.4f}" for a in algs]
    return f"vta {cfg['instances']} instances: " + ", ".join(parts)


def run_disaster(cfg, out):
    configs = [_run_config(cfg, a) for a in cfg["algorithms"]]
    result = experiments.disaster_experiment(configs, cfg["trials"], cfg["ambulances"],
                                             cfg["incidents"], cfg["seed"], exact=cfg["exact"])
    lines = ["algorithm,cut,percent_complete,percent_saved,mean_ratio"]
    for alg, by_cut in result.metrics.items():
        for cut, m in by_cut.items():
            ratio = "" if m.mean_ratio is None else repr(m.mean_ratio)
            lines.append(f"{alg},{cut},{m.percent_complete!r},{m.percent_saved!r},{ratio}")
    io.write_csv(out / "disaster_metrics.csv", "\n".join(lines) + "\n", cfg)
    io.write_json(out / "summary.json", {"metrics": result.summary()}, cfg)
    last = {alg: by_cut[max(by_cut)] for alg, by_cut in result.metrics.items()}
    parts = [f"{a} {m.percent_complete:.1f}% complete" for a, m in last.items()]
    return f"disaster {cfg['ambulances']}x{cfg['incidents']}, {cfg['trials']} trials: " + ", ".join(parts)


def run_solve(cfg, out):
    if cfg.get("instance"):
        try:
            data = json.loads(Path(cfg["instance"]).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read instance {cfg['instance']}: {exc}") from exc
        instance = DisasterInstance.from_dict(data)
    else:
        instance = generate_disaster(cfg["seed"], cfg["ambulances"], cfg["incidents"])
    solution = solve_exact(instance)
    io.write_json(out / "instance.json", instance.to_dict(), cfg)
    io.write_json(out / "solution.json", solution.to_dict(), cfg)
    return f"solve: objective {solution.objective:.6g}, assignment {list(solution.assignment)}"


RUNNERS = {"track": run_track, "sweep": run_sweep, "climbing": run_climbing,
           "vta": run_vta, "disaster": run_disaster, "solve": run_solve}


def _load_config_file(path) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise jsonschema.ValidationError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise jsonschema.ValidationError("config file must hold a JSON object")
    data.pop("command", None)
    return data


def cli_main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    command = args.command
    flags = {name: getattr(args, name) for name, _, _ in PARAMETERS[command]}
    flags["full_scale"] = args.full_scale
    try:
        file_values = _load_config_file(args.config) if args.config else {}
        cfg = resolve_config(command, file_values, flags)
    except jsonschema.ValidationError as exc:
        print(f"afffp {command}: invalid configuration: {exc.message}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        out = io.prepare_output_dir(args.out)
        io.atomic_write_text(out / "config.json",
                             json.dumps(dict(cfg, command=command), indent=2, sort_keys=True) + "\n")
    except OutputError as exc:
        print(f"afffp {command}: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    try:
        line = RUNNERS[command](cfg, out)
    except OutputError as exc:
        print(f"afffp {command}: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    except (RunFailure, NumericalDegeneracyError, InputError, InstanceTooLargeError) as exc:
        print(f"afffp {command}: run failed: {exc}", file=sys.stderr)
        return EXIT_RUN
    print(f"{line} -> {out}")
    return EXIT_OK


def main():
    sys.exit(cli_main())
