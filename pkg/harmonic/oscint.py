"""
Oscillatory Integrals - tensor Gauss-Legendre evaluation of ∫ ω(x) e(λφ(x)) dx,
stationary-phase predictions and decay-rate fits
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.stats import linregress

from counting.weights import Ball
from geometry.legendre import DualFamily, corner_points
from geometry.manifold import PencilFunction
from utils.config import config
from utils.errors import DataError, DomainError, InversionError, ParameterError, QuadratureError
from utils.helpers import halton_box

logger = logging.getLogger(__name__)

Amplitude = Callable[[np.ndarray], np.ndarray]
Bounds = Tuple[Tuple[float, ...], Tuple[float, ...]]


# phases

class QuadraticPhase:
    """φ(x) = ½ xᵀHx + b·x"""

    def __init__(self, hessian: Sequence[Sequence[float]], linear: Optional[Sequence[float]] = None):
        self.hessian = np.atleast_2d(np.asarray(hessian, dtype=float))
        d = self.hessian.shape[0]
        self.linear = np.zeros(d) if linear is None else np.asarray(linear, dtype=float)

    def values(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        return 0.5 * np.einsum("ni,ij,nj->n", X, self.hessian, X) + X @ self.linear

    def gradients(self, X: np.ndarray) -> np.ndarray:
        return np.atleast_2d(X) @ self.hessian.T + self.linear

    def hessians(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        return np.broadcast_to(self.hessian, (X.shape[0],) + self.hessian.shape)


class PencilPhase:
    """φ(x) = F(x) - k·x/j_s for the primal Poisson integrals"""

    def __init__(self, F: PencilFunction, k: Sequence[int]):
        self.F = F
        self.shift = np.asarray(k, dtype=float) / F.j[F.s - 1]

    def values(self, X: np.ndarray) -> np.ndarray:
        return self.F.values(X) - np.atleast_2d(X) @ self.shift

    def gradients(self, X: np.ndarray) -> np.ndarray:
        return self.F.gradients(X) - self.shift

    def hessians(self, X: np.ndarray) -> np.ndarray:
        return self.F.hessians(X)


class DualPhase:
    """φ(z) = F*(z) - k·z/j_s for the dual Poisson integrals"""

    def __init__(self, family: DualFamily, k: Sequence[int]):
        self.family = family
        self.shift = np.asarray(k, dtype=float) / family.j[family.s - 1]

    def values(self, Z: np.ndarray) -> np.ndarray:
        Z = np.atleast_2d(Z)
        conjugate, _, _ = self.family.conjugate_batch(Z)
        return conjugate - Z @ self.shift

    def gradients(self, Z: np.ndarray) -> np.ndarray:
        X, converged = self.family.invert_gradient_batch(Z)
        if not converged.all():
            raise InversionError("DualPhase: gradient inversion failed")
        return X - self.shift

    def hessians(self, Z: np.ndarray) -> np.ndarray:
        X, converged = self.family.invert_gradient_batch(Z)
        if not converged.all():
            raise InversionError("DualPhase: gradient inversion failed")
        return np.linalg.inv(self.family.F.hessians(X))


# integrals

@dataclass
class OscIntegral:
    """∫_box ω(x) e(λφ(x)) dx with ω supported inside the box"""
    d: int
    phase: object
    amplitude: Amplitude
    lam: float
    bounds: Bounds
    critical_point: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.lam < 0:
            raise ParameterError(f"frequency λ={self.lam} must be nonnegative")
        lows, highs = self.bounds
        if len(lows) != self.d or len(highs) != self.d:
            raise ParameterError(f"quadrature box must have {self.d} coordinates per corner")
        if self.critical_point is not None:
            v0 = np.asarray(self.critical_point, dtype=float).reshape(1, -1)
            if np.max(np.abs(self.phase.gradients(v0))) > 1e-10:
                raise ParameterError(f"{self.critical_point} is not a critical point of the phase")
            if self.delta == 0:
                raise ParameterError("critical point is degenerate")

    @property
    def hessian_at_critical(self) -> np.ndarray:
        v0 = np.asarray(self.critical_point, dtype=float).reshape(1, -1)
        return np.asarray(self.phase.hessians(v0)[0])

    @property
    def delta(self) -> float:
        """Δ = |det H_φ(v0)|"""
        return float(abs(np.linalg.det(self.hessian_at_critical)))

    @property
    def signature(self) -> int:
        eigenvalues = np.linalg.eigvalsh(self.hessian_at_critical)
        if np.any(np.abs(eigenvalues) <= 1e-10):
            raise ParameterError("phase Hessian has a zero eigenvalue at the critical point")
        return int(np.sum(eigenvalues > 0) - np.sum(eigenvalues < 0))

    def with_lambda(self, lam: float) -> "OscIntegral":
        return OscIntegral(self.d, self.phase, self.amplitude, lam, self.bounds, self.critical_point)


@dataclass
class QuadratureResult:
    value: complex
    error: float
    nodes_per_axis: int


def ball_bounds(ball: Ball) -> Bounds:
    return (tuple(c - ball.radius for c in ball.center), tuple(c + ball.radius for c in ball.center))


def _axis_rule(low: float, high: float, panels: int, order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = leggauss(order)
    edges = np.linspace(low, high, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    return ((mid[:, None] + half[:, None] * nodes).ravel(),
            (half[:, None] * weights).ravel())


def _tensor_quadrature(integral: OscIntegral, panels: int, order: int) -> complex:
    lows, highs = integral.bounds
    rules = [_axis_rule(lo, hi, panels, order) for lo, hi in zip(lows, highs)]
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    weight_grids = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    X = np.stack([g.ravel() for g in grids], axis=-1)
    W = np.prod(np.stack([g.ravel() for g in weight_grids], axis=-1), axis=-1)

    amplitude = integral.amplitude(X)
    live = amplitude != 0
    if not live.any():
        return 0j
    if integral.lam == 0:
        return complex(np.sum(W[live] * amplitude[live]))
    phase = integral.phase.values(X[live])
    oscillation = np.exp(2j * np.pi * integral.lam * phase)
    return complex(np.sum(W[live] * amplitude[live] * oscillation))


def evaluate(integral: OscIntegral, refinement: int = 10) -> QuadratureResult:
    """Tensor Gauss-Legendre with panel doubling until successive values agree.

    Nodes per axis start at max(64, 8·⌈λ⌉^(1/d)); at most `refinement` doublings
    and never more than the configured node cap in total.
    """
    if refinement < 1:
        raise ParameterError(f"refinement={refinement} must be at least 1")
    order = config.quadrature_panel_order
    start = max(64, 8 * math.ceil(math.ceil(integral.lam) ** (1.0 / integral.d)))
    panels = math.ceil(start / order)

    history: List[complex] = []
    for _ in range(refinement + 1):
        per_axis = panels * order
        if per_axis ** integral.d > config.quadrature_node_cap:
            break
        value = _tensor_quadrature(integral, panels, order)
        if history and abs(value - history[-1]) < config.quadrature_tol:
            return QuadratureResult(value, abs(value - history[-1]), per_axis)
        history.append(value)
        panels *= 2
    raise QuadratureError(
        f"Quadrature: no convergence at λ={integral.lam} within the node cap",
        previous=history[-2] if len(history) > 1 else None,
        last=history[-1] if history else None,
    )


def stationary_phase_prediction(integral: OscIntegral) -> complex:
    """λ^(-d/2) Δ^(-1/2) e(λφ(v0) + σ/8) ω(v0)"""
    if integral.critical_point is None:
        raise ParameterError("stationary phase needs a critical point")
    if integral.lam <= 0:
        raise ParameterError("stationary phase needs λ > 0")
    v0 = np.asarray(integral.critical_point, dtype=float).reshape(1, -1)
    phase_at = float(integral.phase.values(v0)[0])
    amplitude_at = float(integral.amplitude(v0)[0])
    scale = integral.lam ** (-integral.d / 2) / math.sqrt(integral.delta)
    return scale * np.exp(2j * np.pi * (integral.lam * phase_at + integral.signature / 8)) * amplitude_at


class DecayKind(Enum):
    STATIONARY = "stationary"
    NONSTATIONARY = "nonstationary"


@dataclass
class DecayFit:
    slope: float
    intercept: float
    r_squared: float
    lambdas: List[float]
    magnitudes: List[float]
    predictions: List[complex]
    values: List[complex]


def decay_slope(kind: DecayKind, integrals: Sequence[OscIntegral], refinement: int = 10) -> DecayFit:
    """Least-squares slope of log|I| (non-stationary) or log|I - prediction| (stationary) vs log λ"""
    kind = DecayKind(kind)
    if len(integrals) < 5:
        raise ParameterError("decay fits need a λ grid of at least five points")
    lambdas = np.array([i.lam for i in integrals], dtype=float)
    ratios = lambdas[1:] / lambdas[:-1]
    if np.any(lambdas <= 0) or not np.allclose(ratios, ratios[0], rtol=1e-9):
        raise ParameterError("decay fits need a geometric λ grid")

    values, predictions, magnitudes = [], [], []
    for integral in integrals:
        value = evaluate(integral, refinement).value
        prediction = stationary_phase_prediction(integral) if kind is DecayKind.STATIONARY else 0j
        values.append(value)
        predictions.append(prediction)
        magnitudes.append(abs(value - prediction))

    magnitudes_arr = np.array(magnitudes)
    usable = magnitudes_arr >= config.noise_floor
    if np.count_nonzero(usable) < 2:
        raise DataError("fewer than two values above the noise floor")
    fit = linregress(np.log(lambdas[usable]), np.log(magnitudes_arr[usable]))
    logger.info("OscillatoryBench: %s slope %.4f over %d points", kind.value, fit.slope,
                int(np.count_nonzero(usable)))
    r_squared = float(fit.rvalue ** 2) if np.isfinite(fit.rvalue) else math.nan
    return DecayFit(float(fit.slope), float(fit.intercept), r_squared,
                    lambdas.tolist(), magnitudes, predictions, values)


# integrals attached to a dual family

def primal_integral(family: DualFamily, q: int, k: Sequence[int]) -> OscIntegral:
    """I(q, j, k) = ∫ e(q j_s (F(x) - k·x/j_s)) w(x) dx"""
    phase = PencilPhase(family.F, k)
    j_s = family.j[family.s - 1]
    critical = None
    try:
        x = family.invert_gradient(phase.shift)
        if family.support.contains(x)[0]:
            critical = tuple(float(v) for v in x)
    except (InversionError, DomainError) as exc:
        logger.debug("OscillatoryBench: no critical point for k=%s (%s)", tuple(k), exc)
    return OscIntegral(family.spec.n, phase, family.weight, float(q * j_s),
                       ball_bounds(family.support), critical)


def dual_integral(family: DualFamily, d: int, k: Sequence[int]) -> OscIntegral:
    """I*(d, j, k) = ∫ w*(z) e(d j_s (F*(z) - k·z/j_s)) / √|det H_F((∇F)⁻¹z)| dz"""
    phase = DualPhase(family, k)
    j_s = family.j[family.s - 1]
    support = family.support
    X = np.vstack([corner_points(support.center, support.radius),
                   halton_box(support.center, support.radius, 256)])
    Y = family.F.gradients(X)
    lows, highs = Y.min(axis=0), Y.max(axis=0)
    margin = 0.05 * np.maximum(highs - lows, 1e-12)
    bounds = (tuple((lows - margin).tolist()), tuple((highs + margin).tolist()))

    # ∇φ(z) = (∇F)⁻¹(z) - k/j_s vanishes at z = ∇F(k/j_s)
    critical = None
    preimage = np.asarray(phase.shift).reshape(1, -1)
    if support.contains(preimage)[0]:
        critical = tuple(float(v) for v in family.F.gradients(preimage)[0])
    return OscIntegral(family.spec.n, phase, family.dual_amplitude_batch, float(d * j_s), bounds, critical)
