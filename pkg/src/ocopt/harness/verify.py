"""Seeded cross-check of the exact LQ solver against the brute-force oracle."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..ocp import brute_force_lq, random_lq_problem, solve_lq_exact, verify_control_law

TOLERANCE = 1e-9


@dataclass
class OcpCheck:
    trials: int
    max_agreement: float = 0.0
    max_residual: float = 0.0
    failed_trial: int | None = None

    @property
    def passed(self) -> bool:
        return self.failed_trial is None


def _rel(a, b) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b)) / (1.0 + np.max(np.abs(b))))


def verify_ocp(seed: int = 0, trials: int = 100,
               solver: Callable = solve_lq_exact) -> OcpCheck:
    """Trial ``t`` draws its problem from ``default_rng([seed, t])``; stops at the first failure."""
    report = OcpCheck(trials)
    for t in range(trials):
        prob = random_lq_problem(np.random.default_rng([seed, t]))
        exact = solver(prob)
        brute = brute_force_lq(prob)
        agreement = max(_rel(exact.controls, brute.controls), _rel(exact.cost, brute.cost))
        residual = verify_control_law(prob, exact).max
        report.max_agreement = max(report.max_agreement, agreement)
        report.max_residual = max(report.max_residual, residual)
        if not (agreement <= TOLERANCE and residual <= TOLERANCE):
            report.failed_trial = t
            break
    return report
