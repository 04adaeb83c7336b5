"""
Fits - log-log slopes of sweep results against predicted exponents
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
from scipy.stats import linregress

from counting.lattice import on_manifold_counts
from counting.weights import Ball
from exponents.calculus import theta
from geometry.manifold import ManifoldSpec
from utils.config import config
from utils.errors import DataError, ParameterError

logger = logging.getLogger(__name__)

MODELS = ("count_vs_Q",)

Row = Mapping[str, Union[str, float, int]]


@dataclass
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    predicted_slope: float
    passed: bool
    tolerance: float
    points: int
    mode: str = "asymptotic"
    Q: List[int] = field(default_factory=list)
    values: List[float] = field(default_factory=list)

    def get_status(self) -> Dict[str, object]:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "predicted_slope": self.predicted_slope,
            "pass": self.passed,
            "tolerance": self.tolerance,
            "points": self.points,
            "mode": self.mode,
        }


def read_rows(path: Union[str, Path]) -> List[Dict[str, str]]:
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


def _usable(Qs: Sequence[float], values: Sequence[float]):
    Q = np.asarray(Qs, dtype=float)
    v = np.asarray(values, dtype=float)
    keep = np.isfinite(v) & (v > 0)
    return Q[keep], v[keep]


def _fit(Q: np.ndarray, values: np.ndarray):
    if Q.size < config.min_fit_points:
        raise DataError(f"{Q.size} usable rows, at least {config.min_fit_points} are needed")
    fit = linregress(np.log(Q), np.log(values))
    return float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2)


def fit_exponent(rows: Sequence[Row], n: int, gammas: Sequence[float] = (0.0,),
                 model: str = "count_vs_Q", tolerance: Optional[float] = None) -> FitResult:
    """Slope of log(value) against log(Q); predicted n + 1 - Σγ_r under the main-term model"""
    if model not in MODELS:
        raise ParameterError(f"unknown fit model {model!r}")
    tolerance = config.asymptotic_slope_tol if tolerance is None else tolerance
    Q, values = _usable([float(r["Q"]) for r in rows], [float(r["value"]) for r in rows])
    slope, intercept, r_squared = _fit(Q, values)
    predicted = n + 1 - float(sum(gammas))
    passed = abs(slope - predicted) <= tolerance
    logger.info("Fit: slope %.4f vs predicted %.4f (%s)", slope, predicted, "pass" if passed else "fail")
    return FitResult(slope, intercept, r_squared, predicted, passed, tolerance, int(Q.size),
                     "asymptotic", [int(q) for q in Q], values.tolist())


def dimension_growth_probe(spec: ManifoldSpec, Q_grid: Sequence[int], domain: Optional[Ball] = None,
                           shards: int = 1, tolerance: Optional[float] = None) -> FitResult:
    """Fit log N_M(Q, 0) against log Q; passes when the slope stays below Θ(n, R) + tolerance"""
    tolerance = config.upper_bound_slope_tol if tolerance is None else tolerance
    domain = domain or Ball(spec.x0, spec.eps0)
    counts = on_manifold_counts(spec, domain, list(Q_grid), shards)
    if not any(counts):
        raise DataError("every on-manifold count is zero")
    Q, values = _usable(list(Q_grid), counts)
    slope, intercept, r_squared = _fit(Q, values)
    bound = float(theta(spec.n, spec.R))
    passed = slope <= bound + tolerance
    logger.info("DimensionProbe: slope %.4f against Θ=%.4f", slope, bound)
    return FitResult(slope, intercept, r_squared, bound, passed, tolerance, int(Q.size),
                     "upper_bound", [int(q) for q in Q], values.tolist())


def ratio_stabilization(rows: Sequence[Row]) -> Optional[bool]:
    """Spread of the last three ratios below half that of the first three (reported only)"""
    ratios = [float(r["ratio"]) for r in rows if np.isfinite(float(r["ratio"]))]
    if len(ratios) < 6:
        return None
    return bool(np.std(ratios[-3:]) < 0.5 * np.std(ratios[:3]))
