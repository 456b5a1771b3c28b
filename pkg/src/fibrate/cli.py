"""Command line front end: ``fibrate <solve|mu-seq|scan|verify> --config PATH``.

Exit codes: 0 success, 1 failed verification checks, 2 invalid input,
3 convergence failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .core import solve_t0
from .eigen import eigenbasis
from .errors import (
    BadDegrees,
    BadLevel,
    BadParams,
    BadSpec,
    ConfigError,
    FibrateError,
    FormatError,
    GridMismatch,
    NotRadial,
)
from .grid import grid_from_dict
from .io import ResultBundle, load_field, write_outputs
from .model import CLASS_ONE
from .optimizer import SolveOptions, multistart, mu_sequence
from .problems import ProblemParams, build_problem
from .verification import bound_check, divergence_trend, fiber_scan, invariant_suite

COMMANDS = ("solve", "mu-seq", "scan", "verify")
FORMATS = ("json", "csv")
CONFIG_KEYS = {"command", "problem", "grid", "options", "output", "formats", "levels", "scan", "samples"}
SCAN_KEYS = {"field", "t_min", "t_max", "m"}
VALIDATION_ERRORS = (BadSpec, BadParams, BadDegrees, GridMismatch, NotRadial, ConfigError, FormatError, BadLevel)


@dataclass
class RunConfig:
    command: str
    problem: ProblemParams
    grid: dict
    options: SolveOptions = field(default_factory=SolveOptions)
    output: str = None
    formats: tuple = ("json",)
    levels: int = 3
    scan: dict = field(default_factory=dict)
    samples: int = 100
    base_dir: Path = field(default=Path("."), repr=False)
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_dict(cls, d: dict, base_dir=".") -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("configuration must be a JSON object")
        unknown = set(d) - CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        for key in ("command", "problem", "grid"):
            if key not in d:
                raise ConfigError(f"configuration needs {key!r}")
        if d["command"] not in COMMANDS:
            raise ConfigError(f"command must be one of {COMMANDS}, got {d['command']!r}")
        formats = d.get("formats", ["json"])
        if isinstance(formats, str):
            formats = [f for f in formats.split(",") if f]
        if not formats or set(formats) - set(FORMATS):
            raise ConfigError(f"formats must be a non-empty subset of {FORMATS}")
        scan = dict(d.get("scan", {}))
        if set(scan) - SCAN_KEYS:
            raise ConfigError(f"unknown scan keys: {sorted(set(scan) - SCAN_KEYS)}")
        levels, samples = d.get("levels", 3), d.get("samples", 100)
        if not isinstance(levels, int) or not isinstance(samples, int) or samples < 1:
            raise ConfigError("levels and samples must be positive integers")
        if not isinstance(d["problem"], dict) or not isinstance(d["grid"], dict):
            raise ConfigError("problem and grid must be objects")
        return cls(
            command=d["command"],
            problem=ProblemParams.from_dict(d["problem"]),
            grid=dict(d["grid"]),
            options=SolveOptions.from_dict(d.get("options", {})),
            output=d.get("output"),
            formats=tuple(formats),
            levels=levels,
            scan=scan,
            samples=samples,
            base_dir=Path(base_dir),
            raw=json.loads(json.dumps(d)),
        )

    def echo(self) -> dict:
        """Normalised configuration, sufficient to repeat the run."""
        out = dict(self.raw)
        out["options"] = {k: getattr(self.options, k) for k in SolveOptions.__dataclass_fields__}
        out["formats"] = list(self.formats)
        return out


def _resolve_weights(params: ProblemParams, grid, base_dir) -> ProblemParams:
    """Replace path-valued ``f``/``g`` by the field they name."""
    updates = {}
    for name in ("f", "g"):
        val = getattr(params, name)
        if isinstance(val, str):
            updates[name] = load_field(Path(base_dir) / val, grid)
        elif isinstance(val, list):
            updates[name] = np.asarray(val, float)
    return replace(params, **updates) if updates else params


def _scan_field(cfg, model):
    path = cfg.scan.get("field")
    if path:
        return load_field(cfg.base_dir / path, model.grid)
    return eigenbasis(model.grid, 1)[1][:, 0]


def run(cfg: RunConfig) -> ResultBundle:
    """Execute the configured command and write outputs if a directory is set."""
    start = time.perf_counter()
    grid = grid_from_dict(cfg.grid)
    model = build_problem(_resolve_weights(cfg.problem, grid, cfg.base_dir), grid)
    opts = cfg.options
    bundle = ResultBundle(grid=grid)
    meta = {
        "tool": "fibrate",
        "version": __version__,
        "command": cfg.command,
        "seed": opts.seed,
        "config": cfg.echo(),
        "model": {"name": model.name, "class": model.class_tag, "direction": model.direction},
    }
    if cfg.command == "solve":
        bundle.records = multistart(model, opts.starts, opts)
    elif cfg.command == "mu-seq":
        for est, rec in mu_sequence(model, cfg.levels, opts):
            bundle.estimates.append(est)
            if rec is not None:
                bundle.records.append(rec)
                bundle.record_levels.append((est.n, est.bound))
        bundle.record_levels = bundle.record_levels or []
    elif cfg.command == "scan":
        u = _scan_field(cfg, model)
        sc = cfg.scan
        bundle.scan = fiber_scan(model, u, sc.get("t_min", 1e-6), sc.get("t_max", 1e6), sc.get("m", 200))
        diag = solve_t0(model, u, strict=False)
        meta["scan"] = {"t0": diag.t0, "lambda": diag.lam, "critical_type": diag.critical_type, "in_D": diag.in_D}
    elif cfg.command == "verify":
        bundle.reports = invariant_suite(model, cfg.samples, opts.seed)
        if model.name == "semilinear" or model.class_tag == CLASS_ONE:
            bundle.reports.append(bound_check(model, 1000, opts.seed))
        bundle.reports.append(divergence_trend(model))
    meta["wall_time"] = time.perf_counter() - start
    bundle.meta = meta
    if cfg.output:
        write_outputs(bundle, cfg.formats, cfg.base_dir / cfg.output)
    return bundle


def exit_status(cfg: RunConfig, bundle: ResultBundle) -> int:
    if cfg.command == "solve" and not any(r.converged for r in bundle.records):
        return 3
    if cfg.command == "verify" and not all(r.passed for r in bundle.reports):
        return 1
    return 0


def _parser():
    p = argparse.ArgumentParser(prog="fibrate", description="Zero-energy critical points via the fibering map.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON configuration file")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--format", help="comma separated subset of json,csv")
    p.add_argument("--seed", type=int, help="random seed (overrides the config)")
    return p


def load_config(args) -> RunConfig:
    path = Path(args.config)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    raw["command"] = args.command
    if args.format:
        raw["formats"] = args.format
    if args.seed is not None:
        raw.setdefault("options", {})["seed"] = args.seed
    cfg = RunConfig.from_dict(raw, base_dir=path.parent)
    if args.out:
        cfg.output = str(Path(args.out).resolve())
    elif cfg.output is None:
        cfg.output = "."
    return cfg


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args)
        bundle = run(cfg)
    except VALIDATION_ERRORS as exc:
        print(f"fibrate: invalid input: {exc}", file=sys.stderr)
        return 2
    except FibrateError as exc:
        print(f"fibrate: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    code = exit_status(cfg, bundle)
    if code == 3:
        print("fibrate: no start converged", file=sys.stderr)
    elif code == 1:
        failed = [r.name for r in bundle.reports if not r.passed]
        print(f"fibrate: failed checks: {', '.join(failed)}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
