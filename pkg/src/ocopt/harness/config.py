"""Experiment configuration: JSON schema, loading and validation.

Schema (all keys optional except a problem/algorithm source)::

    {
      "output_dir": "results",
      "seed": 0,                      # default seed for randomized problems
      "write_csv": true,
      "write_summary": true,
      "runs": [
        {"problem": "rosenbrock", "algorithm": "alg2-recursive",
         "name": "rb-alg2", "params": {"M": 0.001}, "x0": [-1.2, 1.0], "seed": 3}
      ],
      "matrix": {"problems": ["quadratic-diag-2-3"], "algorithms": ["alg1", "gd"],
                 "params": {}}
    }

A bare ``{"problem": ..., "algorithm": ...}`` object is a one-run config.
``params`` may set any of R, M, D, gd_step, n_horizon, horizon_cap, grad_tol,
step_tol, max_iter, inner_mode, guard; the rest come from
:func:`ocopt.steppers.default_parameters`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..problems import PROBLEMS, ProblemSpec, get_problem
from ..steppers import Algorithm, StepperConfig, default_parameters

OVERRIDABLE = ("R", "M", "D", "gd_step", "n_horizon", "horizon_cap", "grad_tol",
               "step_tol", "max_iter", "inner_mode", "guard")


class ConfigError(ValueError):
    pass


class ParseError(ConfigError):
    def __init__(self, msg: str, line: int, column: int):
        super().__init__(f"{msg} (line {line}, column {column})")
        self.line = line
        self.column = column


class ValidationError(ConfigError):
    def __init__(self, field_name: str, msg: str):
        super().__init__(f"{field_name}: {msg}")
        self.field = field_name


@dataclass
class RunSpec:
    name: str
    problem_name: str
    problem: ProblemSpec
    x0: np.ndarray
    seed: int
    stepper: StepperConfig
    overrides: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        return {
            "name": self.name,
            "problem": self.problem_name,
            "seed": self.seed,
            "x0": self.x0.tolist(),
            "params": self.stepper.parameters(),
            "overrides": sorted(self.overrides),
        }


@dataclass
class ExperimentConfig:
    runs: list
    output_dir: Path
    write_csv: bool = True
    write_summary: bool = True


def _resolve_run(i: int, raw: dict, default_seed: int) -> RunSpec:
    where = f"runs[{i}]"
    if not isinstance(raw, dict):
        raise ValidationError(where, "must be an object")
    unknown = set(raw) - {"name", "problem", "algorithm", "params", "x0", "seed"}
    if unknown:
        raise ValidationError(f"{where}.{sorted(unknown)[0]}", "unknown key")
    problem_name = raw.get("problem")
    if problem_name not in PROBLEMS:
        raise ValidationError(f"{where}.problem", f"unknown problem {problem_name!r}")
    try:
        algorithm = Algorithm(raw.get("algorithm"))
    except ValueError:
        raise ValidationError(f"{where}.algorithm",
                              f"unknown algorithm {raw.get('algorithm')!r}") from None
    seed = raw.get("seed", default_seed)
    if not isinstance(seed, int) or seed < 0:
        raise ValidationError(f"{where}.seed", "must be a non-negative integer")
    problem = get_problem(problem_name, seed)
    if "x0" in raw:
        try:
            x0 = np.asarray(raw["x0"], dtype=float).reshape(-1)
        except (TypeError, ValueError):
            raise ValidationError(f"{where}.x0", "must be a list of numbers") from None
        if x0.size != problem.dimension or not np.all(np.isfinite(x0)):
            raise ValidationError(f"{where}.x0",
                                  f"must be {problem.dimension} finite numbers")
    else:
        x0 = np.asarray(problem.recommended_x0, dtype=float).copy()
    params = raw.get("params", {}) or {}
    if not isinstance(params, dict):
        raise ValidationError(f"{where}.params", "must be an object")
    try:
        cfg = default_parameters(problem.oracle, x0, algorithm)
    except (ArithmeticError, ValueError) as exc:
        raise ValidationError(f"{where}.params", f"cannot derive defaults: {exc}") from None
    for key, value in params.items():
        if key not in OVERRIDABLE:
            raise ValidationError(f"{where}.params.{key}", "unknown parameter")
        if key in ("R", "M", "D"):
            try:
                value = np.asarray(value, dtype=float)
            except (TypeError, ValueError):
                raise ValidationError(f"{where}.params.{key}", "must be numeric") from None
            value = float(value) if value.ndim == 0 else value
        setattr(cfg, key, value)
    try:
        cfg.__post_init__()
        cfg.validate(problem.dimension)
    except (ValueError, TypeError) as exc:
        msg = str(exc)
        name, _, detail = msg.partition(": ")
        if name in OVERRIDABLE:
            raise ValidationError(f"{where}.params.{name}", detail) from None
        raise ValidationError(f"{where}.params", msg) from None
    name = raw.get("name") or f"{i:03d}-{problem_name}-{algorithm.value}"
    return RunSpec(name, problem_name, problem, x0, seed, cfg, dict(params))


def parse_config(data, *, seed: Optional[int] = None,
                 output_dir: Optional[str] = None) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ValidationError("<root>", "config must be a JSON object")
    default_seed = data.get("seed", 0) if seed is None else seed
    raw_runs = list(data.get("runs", []))
    if "problem" in data or "algorithm" in data:
        raw_runs.insert(0, {k: data[k] for k in ("problem", "algorithm", "params", "x0", "name")
                            if k in data})
    matrix = data.get("matrix")
    if matrix is not None:
        if not isinstance(matrix, dict):
            raise ValidationError("matrix", "must be an object")
        for p in matrix.get("problems", []):
            for a in matrix.get("algorithms", []):
                raw_runs.append({"problem": p, "algorithm": a,
                                 "params": dict(matrix.get("params", {}))})
    if not raw_runs:
        raise ValidationError("runs", "config defines no runs")
    runs = []
    for i, raw in enumerate(raw_runs):
        if seed is not None and isinstance(raw, dict):
            raw = {**raw, "seed": seed}
        runs.append(_resolve_run(i, raw, default_seed))
    names = [r.name for r in runs]
    if len(set(names)) != len(names):
        raise ValidationError("runs", "run names must be unique")
    out = Path(output_dir if output_dir is not None else data.get("output_dir", "results"))
    return ExperimentConfig(runs, out, bool(data.get("write_csv", True)),
                            bool(data.get("write_summary", True)))


def load_config(path, *, seed: Optional[int] = None,
                output_dir: Optional[str] = None) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    return parse_config(data, seed=seed, output_dir=output_dir)
