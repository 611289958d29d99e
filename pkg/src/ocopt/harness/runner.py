"""Execute configured runs and write per-run CSV traces plus ``summary.json``."""
from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from ..analysis import RateReport, rate_report
from ..steppers import StopKind, StopReason, Trace, run
from .config import ExperimentConfig, RunSpec

log = logging.getLogger(__name__)

CSV_HEADER = ("k", "f", "grad_norm", "err_norm", "ratio", "bound")


@dataclass
class RunResult:
    spec: RunSpec
    trace: Trace
    stop: StopReason
    report: RateReport

    @property
    def ok(self) -> bool:
        return self.stop.kind not in (StopKind.MAX_ITERATIONS, StopKind.NUMERICAL_FAILURE)

    def summary(self) -> dict:
        return {**self.spec.resolved(), **self.report.to_dict()}


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def trace_csv(result: RunResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    rep = result.report
    for i, rec in enumerate(result.trace.records):
        ratio = rep.ratios[i] if i < len(rep.ratios) else None
        bound = rep.bounds[i] if i < len(rep.bounds) else None
        writer.writerow([rec.k, _fmt(rec.f), _fmt(rec.grad_norm), _fmt(rep.errors[i]),
                         _fmt(ratio), _fmt(bound)])
    return buf.getvalue()


def execute_run(spec: RunSpec) -> RunResult:
    oracle = spec.problem.oracle
    trace, stop = run(oracle, spec.x0, spec.stepper)
    report = rate_report(trace, stop, oracle, spec.stepper)
    log.info("%s: %s after %d iterations (%s)", spec.name, stop, trace.iterations,
             report.classification)
    return RunResult(spec, trace, stop, report)


def execute(cfg: ExperimentConfig, jobs: int = 1) -> list:
    """Run everything in ``cfg``; results keep the config's run order."""
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(execute_run, cfg.runs))
    else:
        results = [execute_run(spec) for spec in cfg.runs]
    if cfg.write_csv or cfg.write_summary:
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
    if cfg.write_csv:
        for res in results:
            path = cfg.output_dir / f"{res.spec.name}.csv"
            try:
                path.write_text(trace_csv(res))
            except OSError as exc:
                raise OSError(f"run {res.spec.name}: cannot write {path}: {exc}") from exc
    if cfg.write_summary:
        summary = {"runs": [res.summary() for res in results]}
        (cfg.output_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return results


def exit_code(results) -> int:
    return 0 if all(r.ok for r in results) else 2
