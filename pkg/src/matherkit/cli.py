"""Command-line frontend: model building, alpha/beta runs and reports.

Config precedence is flags > config file > defaults.  Exit codes: 0 ok,
2 configuration error, 3 degraded results (too many holes), 4 internal
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .alpha import HomologyBudget
from .analysis import (
    build_alpha_field,
    build_beta_grid,
    corner_scan,
    flat_detect,
    mane_stability_sweep,
    verify_max_formula,
    zero_level_crossings,
)
from .fields import ModelConfigError
from .models import ChannelModelSpec, build_channel_model, check_lemma_constant

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGRADED = 3
EXIT_INTERNAL = 4

_CONFIG_KEYS = {
    "model", "model_path", "region", "resolution", "budget", "tol", "tol_flat",
    "tol_corner", "level", "candidates", "eps", "trials", "seed", "jobs", "out",
    "probe_step",
}
_BUDGET_KEYS = {
    "hmax", "classes", "T_grid", "T_span", "N", "restarts", "tol", "max_iter",
    "screen_keep", "jitter_amplitude", "seed", "precondition", "period_tol",
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    model: ChannelModelSpec = field(default_factory=lambda: ChannelModelSpec(n=2).resolved())
    region: Optional[list] = None
    resolution: int = 41
    budget: HomologyBudget = field(default_factory=HomologyBudget)
    tol: Optional[float] = None
    tol_flat: float = 1e-3
    tol_corner: float = 1e-3
    level: Optional[float] = None
    candidates: Optional[list] = None
    eps: float = 1e-3
    trials: int = 20
    seed: int = 0
    jobs: int = 1
    out: Optional[str] = None
    probe_step: float = 1e-2

    def resolved_region(self, n: int) -> list:
        if self.region is not None:
            region = [tuple(map(float, pair)) for pair in self.region]
            if len(region) != n:
                raise ConfigError(f"region needs {n} axis ranges, got {len(region)}")
            return region
        return [(-2.2, 2.2)] + [(0.0, 0.0)] * (n - 1)

    def to_json(self) -> dict:
        budget = {
            "hmax": self.budget.hmax,
            "classes": None if self.budget.classes is None
            else [list(h) for h in self.budget.classes],
            "T_grid": list(self.budget.T_grid),
            "N": self.budget.N,
            "restarts": self.budget.restarts,
            "tol": self.budget.tol,
            "screen_keep": self.budget.screen_keep,
            "seed": self.budget.seed,
        }
        return {
            "command": self.command,
            "model": self.model.to_json(),
            "region": self.region,
            "resolution": self.resolution,
            "budget": budget,
            "tol": self.tol,
            "tol_flat": self.tol_flat,
            "tol_corner": self.tol_corner,
            "level": self.level,
            "candidates": self.candidates,
            "eps": self.eps,
            "trials": self.trials,
            "seed": self.seed,
            "jobs": self.jobs,
            "out": self.out,
            "probe_step": self.probe_step,
        }


def _load_config_document(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return doc


def _build_run_config(command: str, args) -> RunConfig:
    doc = _load_config_document(args.config)
    cfg = RunConfig(command=command)

    if "model_path" in doc and "model" in doc:
        raise ConfigError("give either 'model' or 'model_path', not both")
    if "model_path" in doc:
        with open(doc["model_path"], "r", encoding="utf-8") as fh:
            cfg.model = ChannelModelSpec.from_json(json.load(fh))
    elif "model" in doc:
        if not isinstance(doc["model"], dict):
            raise ConfigError("'model' must be an object")
        cfg.model = ChannelModelSpec.from_json(doc["model"])

    budget_doc = doc.get("budget", {})
    if not isinstance(budget_doc, dict):
        raise ConfigError("'budget' must be an object")
    unknown = set(budget_doc) - _BUDGET_KEYS
    if unknown:
        raise ConfigError(f"unknown budget keys: {sorted(unknown)}")
    budget_kwargs = dict(budget_doc)
    if "classes" in budget_kwargs and budget_kwargs["classes"] is not None:
        budget_kwargs["classes"] = tuple(tuple(int(v) for v in h)
                                         for h in budget_kwargs["classes"])
    if "T_grid" in budget_kwargs:
        budget_kwargs["T_grid"] = tuple(float(t) for t in budget_kwargs["T_grid"])
    cfg.budget = HomologyBudget(**budget_kwargs)

    for key in ("region", "candidates", "level", "tol", "tol_flat", "tol_corner",
                "eps", "trials", "seed", "jobs", "out", "resolution", "probe_step"):
        if key in doc:
            setattr(cfg, key, doc[key])

    # flags override file keys
    if args.out is not None:
        cfg.out = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    if args.jobs is not None:
        cfg.jobs = args.jobs
    if args.resolution is not None:
        cfg.resolution = args.resolution
    if args.tol is not None:
        cfg.tol = args.tol

    # the generic --tol flag maps onto the command's main tolerance
    final_budget = dict(budget_kwargs)
    final_budget.setdefault("seed", int(cfg.seed))
    if cfg.tol is not None:
        if float(cfg.tol) <= 0.0:
            raise ConfigError("tol must be positive")
        if command == "flat":
            cfg.tol_flat = float(cfg.tol)
        elif command in ("corners", "stability"):
            cfg.tol_corner = float(cfg.tol)
        else:
            final_budget["tol"] = float(cfg.tol)
    cfg.budget = HomologyBudget(**final_budget)

    for name, value in (("tol_flat", cfg.tol_flat), ("tol_corner", cfg.tol_corner)):
        if value <= 0.0:
            raise ConfigError(f"{name} must be positive")
    if cfg.resolution < 8:
        raise ConfigError("resolution must be at least 8")
    if cfg.jobs < 1:
        raise ConfigError("jobs must be at least 1")
    if cfg.trials < 1:
        raise ConfigError("trials must be at least 1")
    cfg.resolution = int(cfg.resolution)
    cfg.seed = int(cfg.seed)
    cfg.jobs = int(cfg.jobs)
    return cfg


def _emit(doc: dict, out: Optional[str]) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)


def cmd_model_build(cfg: RunConfig) -> int:
    model = build_channel_model(cfg.model)
    check = check_lemma_constant(model)
    doc = cfg.model.to_json()
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(json.dumps({"model": doc, "lemma_check": check}, indent=2, sort_keys=True))
    if not check["satisfied"]:
        print(
            f"warning: barrier inequality unmet: 2*sqrt(K1*K2)*width = "
            f"{check['lhs']:.6g} <= n+1+eps = {check['rhs']:.6g}",
            file=sys.stderr,
        )
    return EXIT_OK


def cmd_model_check(cfg: RunConfig) -> int:
    model = build_channel_model(cfg.model)
    check = check_lemma_constant(model)
    print(json.dumps({"valid": True, "lemma_check": check}, indent=2, sort_keys=True))
    if not check["satisfied"]:
        print("warning: barrier inequality unmet", file=sys.stderr)
    return EXIT_OK


def cmd_alpha(cfg: RunConfig) -> int:
    model = build_channel_model(cfg.model)
    region = cfg.resolved_region(model.n)
    fld = build_alpha_field(model, region, cfg.resolution, cfg.budget, jobs=cfg.jobs)
    if cfg.out:
        fld.to_csv(cfg.out + ".csv")
    summary = fld.summary()
    free_axes = [k for k, ax in enumerate(fld.axes) if len(ax) > 1]
    if len(free_axes) == 1:
        ax = fld.axes[free_axes[0]]
        vals = fld.values.ravel()
        summary["zero_level_crossings"] = zero_level_crossings(ax, vals, cfg.tol_flat)
    _emit({"schema": "alpha-summary/1", "summary": summary},
          cfg.out + ".json" if cfg.out else None)
    if fld.holes and len(fld.holes) > 0.1 * fld.values.size:
        return EXIT_DEGRADED
    return EXIT_OK


def cmd_beta(cfg: RunConfig) -> int:
    model = build_channel_model(cfg.model)
    grid = build_beta_grid(model, cfg.budget)
    if cfg.out:
        grid.to_csv(cfg.out + ".csv")
    _emit({
        "schema": "beta-summary/1",
        "points": int(len(grid.betas)),
        "beta_min": float(np.min(grid.betas)),
    }, cfg.out + ".json" if cfg.out else None)
    return EXIT_OK


def cmd_flat(cfg: RunConfig) -> int:
    model = build_channel_model(cfg.model)
    region = cfg.resolved_region(model.n)
    fld = build_alpha_field(model, region, cfg.resolution, cfg.budget, jobs=cfg.jobs)
    report = flat_detect(fld, level=cfg.level, tol_flat=cfg.tol_flat)
    _emit(report.to_json(), cfg.out)
    if fld.holes and len(fld.holes) > 0.1 * fld.values.size:
        return EXIT_DEGRADED
    return EXIT_OK


def cmd_corners(cfg: RunConfig) -> int:
    model = build_channel_model(cfg.model)
    candidates = None
    if cfg.candidates is not None:
        candidates = [np.asarray(c, dtype=float) for c in cfg.candidates]
    reports = corner_scan(model, candidates=candidates, budget=cfg.budget,
                          tol_corner=cfg.tol_corner, t0=cfg.probe_step)
    doc = {
        "schema": "corner-scan/1",
        "corners_found": sum(int(r.is_corner) for r in reports),
        "reports": [r.to_json() for r in reports],
    }
    _emit(doc, cfg.out)
    return EXIT_OK


def cmd_verify_lemma(cfg: RunConfig) -> int:
    model = build_channel_model(cfg.model)
    region = cfg.resolved_region(model.n)
    axes = []
    for lo, hi in region:
        axes.append(np.array([lo]) if lo == hi else np.linspace(lo, hi, cfg.resolution))
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=-1)
    report = verify_max_formula(model, points, cfg.budget)
    _emit(report.to_json(), cfg.out)
    return EXIT_OK


def cmd_stability(cfg: RunConfig) -> int:
    report = mane_stability_sweep(cfg.model, cfg.eps, cfg.trials, cfg.seed,
                                  budget=cfg.budget, tol_corner=cfg.tol_corner,
                                  t0=cfg.probe_step)
    _emit(report.to_json(), cfg.out)
    return EXIT_OK


_COMMANDS = {
    "model-build": cmd_model_build,
    "model-check": cmd_model_check,
    "alpha": cmd_alpha,
    "beta": cmd_beta,
    "flat": cmd_flat,
    "corners": cmd_corners,
    "verify-lemma": cmd_verify_lemma,
    "stability": cmd_stability,
}


def _add_shared_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="JSON config document")
    parser.add_argument("--out", default=None, help="output path (or prefix)")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--jobs", type=int, default=None)
    parser.add_argument("--resolution", type=int, default=None)
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("--dry-run", action="store_true",
                        help="print the resolved config and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matherkit",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    model = sub.add_parser("model", help="build or check a channel model spec")
    model_sub = model.add_subparsers(dest="model_command", required=True)
    for name in ("build", "check"):
        p = model_sub.add_parser(name)
        _add_shared_flags(p)

    for name in ("alpha", "beta", "flat", "corners", "verify-lemma", "stability"):
        p = sub.add_parser(name)
        _add_shared_flags(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    if command == "model":
        command = f"model-{args.model_command}"
    try:
        cfg = _build_run_config(command, args)
    except (ConfigError, ModelConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.dry_run:
        print(json.dumps(cfg.to_json(), indent=2, sort_keys=True))
        return EXIT_OK
    try:
        return _COMMANDS[command](cfg)
    except (ConfigError, ModelConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - report as internal failure
        print(f"internal failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
