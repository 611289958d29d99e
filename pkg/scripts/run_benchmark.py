"""Run every algorithm on every registered problem with default parameters
and print a compact table.

    python3 scripts/run_benchmark.py [--out results/benchmark] [--max-iter 500]
"""
import argparse
import sys
import warnings

from ocopt.harness.config import parse_config
from ocopt.harness.runner import execute
from ocopt.problems import PROBLEMS
from ocopt.steppers import Algorithm, ParameterWarning

SKIP = {Algorithm.FINITE_HORIZON}   # needs a horizon choice, not a default benchmark


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results/benchmark")
    parser.add_argument("--max-iter", type=int, default=500)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args(argv)

    algorithms = [a.value for a in Algorithm if a not in SKIP]
    cfg = parse_config({"matrix": {"problems": list(PROBLEMS), "algorithms": algorithms,
                                   "params": {"max_iter": args.max_iter}}},
                       seed=args.seed, output_dir=args.out)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ParameterWarning)
        results = execute(cfg, jobs=args.jobs)

    print(f"{'problem':20s} {'algorithm':15s} {'stop':34s} {'iters':>5s} {'final err':>10s}  rate")
    for res in results:
        rep = res.report
        err = "-" if rep.final_error is None else f"{rep.final_error:.2e}"
        stop = str(res.stop)[:34]
        print(f"{res.spec.problem_name:20s} {res.spec.stepper.algorithm.value:15s} {stop:34s} "
              f"{rep.iterations:5d} {err:>10s}  {rep.classification}")
    print(f"CSV traces and summary.json in {cfg.output_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
