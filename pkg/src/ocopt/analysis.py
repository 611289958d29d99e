"""Convergence-rate analysis of traces: error ratios, theoretical bounds,
and a coarse rate classification."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .linalg import LinalgError, spectral_radius
from .steppers import Algorithm, StepperConfig, StopReason, Trace, contraction_matrix

EPS = np.finfo(float).eps
SLOPE_THRESHOLD = 0.05
SHRINK_FACTOR = 0.5
FINITE_TERMINATION_RATIO = 1e-8


class RateClass(str, enum.Enum):
    SUPERLINEAR = "superlinear"
    LINEAR = "linear"
    SUBLINEAR = "sublinear"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class RateClassification:
    label: RateClass
    slope: Optional[float] = None
    mean_ratio: Optional[float] = None

    def __str__(self) -> str:
        if self.label is RateClass.LINEAR:
            return f"linear({self.mean_ratio:.4g})"
        return self.label.value


def noise_floor(x_star_norm: float) -> float:
    return 100.0 * EPS * (1.0 + x_star_norm)


def error_ratios(errors: Sequence[float], floor: float) -> list:
    """``r_k = e_{k+1} / e_k`` where both errors clear ``floor``; ``None`` elsewhere.

    Iterates are rounded relative to ``|x*|``, so an error within the floor
    has no correct digits and neither does a ratio built on it.  The one
    exception is a collapse (``r_k < FINITE_TERMINATION_RATIO``), which is
    kept because it is the signature of finite termination.  The list has one
    entry per error except the last.
    """
    out = []
    for e_now, e_next in zip(errors[:-1], errors[1:]):
        ok = e_now > floor and (e_next > floor or e_next < FINITE_TERMINATION_RATIO * e_now)
        out.append(e_next / e_now if ok else None)
    return out


def classify_rate(ratios: Sequence[float]) -> RateClassification:
    """Label a sequence of valid error ratios.

    Superlinear: least-squares slope of ``log r_k`` against ``k`` is at most
    -0.05 and the last ratio is below half the first.  Linear: slope within
    (-0.05, 0.05) and mean ratio below 1.  Sublinear: mean ratio at least
    ``1 - 1e-6`` while errors still shrink (takes precedence over linear).
    Fewer than three ratios is inconclusive unless one of them shows the
    error vanishing outright.
    """
    r = np.asarray([v for v in ratios if v is not None], dtype=float)
    if r.size and r.size < 3:
        if np.min(r) < FINITE_TERMINATION_RATIO:
            return RateClassification(RateClass.SUPERLINEAR, None, float(np.mean(r)))
        return RateClassification(RateClass.INCONCLUSIVE, None, float(np.mean(r)))
    if r.size < 3:
        return RateClassification(RateClass.INCONCLUSIVE)
    logs = np.log(np.maximum(r, np.finfo(float).tiny))
    ks = np.arange(r.size, dtype=float)
    slope = float(np.polyfit(ks, logs, 1)[0])
    mean = float(np.mean(r))
    if slope <= -SLOPE_THRESHOLD and r[-1] < SHRINK_FACTOR * r[0]:
        label = RateClass.SUPERLINEAR
    elif mean >= 1.0 - 1e-6 and np.all(r < 1.0):
        # checked before linear: a flat run of ratios ~ 1 satisfies both rules
        label = RateClass.SUBLINEAR
    elif -SLOPE_THRESHOLD < slope < SLOPE_THRESHOLD and mean < 1.0:
        label = RateClass.LINEAR
    else:
        label = RateClass.INCONCLUSIVE
    return RateClassification(label, slope, mean)


def bound_exponent(cfg: StepperConfig, k: int) -> int:
    """Power of the contraction radius bounding ``e_{k+1} / e_k``."""
    alg = cfg.algorithm
    if alg in (Algorithm.GRADIENT_DESCENT, Algorithm.NEWTON):
        return 1
    if alg is Algorithm.FINITE_HORIZON:
        return max(int(cfg.n_horizon) - k + 1, 0)
    if cfg.horizon_cap is not None:
        return min(k + 1, int(cfg.horizon_cap))
    return k + 1


@dataclass
class RateReport:
    stop_reason: str
    iterations: int
    final_grad_norm: float
    final_error: Optional[float]
    err_reference: str
    rho: Optional[float]
    errors: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    bounds: list = field(default_factory=list)
    classification: RateClassification = RateClassification(RateClass.INCONCLUSIVE)

    def to_dict(self) -> dict:
        return {
            "stop_reason": self.stop_reason,
            "iterations": self.iterations,
            "final_grad_norm": self.final_grad_norm,
            "final_error": self.final_error,
            "err_reference": self.err_reference,
            "rho": self.rho,
            "ratios": self.ratios,
            "bounds": self.bounds,
            "classification": self.classification.label.value,
            "classification_text": str(self.classification),
            "slope": self.classification.slope,
            "mean_ratio": self.classification.mean_ratio,
        }


def descent_increments(oracle, trace: Trace) -> np.ndarray:
    """``f(x_{k+1}) - f(x_k)`` for each step, free of cancellation.

    Differencing two nearly equal values of ``f`` loses everything below one
    ulp of ``|f|``, so near a minimizer with ``f* != 0`` the raw difference is
    rounding noise.  Instead integrate the gradient along the step with
    Simpson's rule, which is exact for quadratics and has error
    ``O(|s|^5)`` otherwise.
    """
    out = []
    for rec, nxt in zip(trace.records[:-1], trace.records[1:]):
        s = nxt.x - rec.x
        mid = oracle.grad(rec.x + 0.5 * s)
        out.append(float(s @ (oracle.grad(rec.x) + 4.0 * mid + oracle.grad(nxt.x))) / 6.0)
    return np.array(out)


def rate_report(trace: Trace, stop: StopReason, oracle, cfg: StepperConfig) -> RateReport:
    """Error ratios against the known minimizer (or the final iterate when none
    is known, which biases late ratios toward zero) plus the radius bound."""
    x_star = oracle.known_minimizer
    if x_star is not None:
        reference = np.asarray(x_star, dtype=float)
        err_reference = "known_minimizer"
    else:
        reference = trace.final.x
        err_reference = "final_iterate"
    errors = [float(np.linalg.norm(r.x - reference)) for r in trace.records]
    floor = noise_floor(float(np.linalg.norm(reference)))
    ratios = error_ratios(errors, floor)
    try:
        rho = spectral_radius(contraction_matrix(oracle, reference, cfg))
    except (LinalgError, ArithmeticError, ValueError):
        rho = None
    bounds = [None if rho is None else rho ** bound_exponent(cfg, k) for k in range(len(ratios))]
    return RateReport(
        stop_reason=str(stop),
        iterations=trace.iterations,
        final_grad_norm=trace.final.grad_norm,
        final_error=errors[-1] if errors else None,
        err_reference=err_reference,
        rho=rho,
        errors=errors,
        ratios=ratios,
        bounds=bounds,
        classification=classify_rate(ratios),
    )
