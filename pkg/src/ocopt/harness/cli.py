"""``opt`` command line: ``run``, ``verify-ocp`` and ``list``."""
from __future__ import annotations

import argparse
import logging
import sys
import warnings

from ..problems import PROBLEMS, get_problem
from ..steppers import Algorithm
from .config import ConfigError, load_config
from .runner import execute, exit_code
from .verify import TOLERANCE, verify_ocp


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config, seed=args.seed, output_dir=args.out)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    results = execute(cfg, jobs=args.jobs)
    for res in results:
        rep = res.report
        err = "n/a" if rep.final_error is None else f"{rep.final_error:.3e}"
        print(f"{res.spec.name:40s} {str(res.stop):28s} iters={rep.iterations:4d} "
              f"|g|={rep.final_grad_norm:.3e} err={err} {rep.classification}")
    print(f"wrote {cfg.output_dir}")
    return exit_code(results)


def _cmd_verify(args) -> int:
    report = verify_ocp(seed=args.seed, trials=args.trials)
    print(f"trials={report.trials} max_agreement={report.max_agreement:.3e} "
          f"max_residual={report.max_residual:.3e} tol={TOLERANCE:g}")
    if not report.passed:
        print(f"FAIL: trial {report.failed_trial} (seed {args.seed})", file=sys.stderr)
        return 1
    return 0


def _cmd_list(args) -> int:
    print("problems:")
    for name in PROBLEMS:
        spec = get_problem(name)
        print(f"  {name:22s} n={spec.dimension} {spec.convexity_class.value}")
    print("algorithms:")
    for alg in Algorithm:
        print(f"  {alg.value}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opt", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None, help="output directory (overrides config)")
    p_run.add_argument("--seed", type=int, default=None,
                       help="seed for randomized problems (overrides config)")
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.set_defaults(func=_cmd_run)

    p_ver = sub.add_parser("verify-ocp", help="cross-check the LQ optimal-control oracle")
    p_ver.add_argument("--trials", type=int, default=100)
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.set_defaults(func=_cmd_verify)

    p_list = sub.add_parser("list", help="list problems and algorithms")
    p_list.set_defaults(func=_cmd_list)
    return parser


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    with warnings.catch_warnings():
        warnings.showwarning = _show_warning
        return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
