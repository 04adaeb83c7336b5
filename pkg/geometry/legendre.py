"""
Legendre Duality - gradient inversion, conjugate functions and dual weights of pencils
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from counting.weights import Ball, WeightFunction, standard_weight
from geometry.manifold import ManifoldSpec, PencilFunction, pencil_function
from geometry.polynomials import ExactPolynomial
from utils.config import config
from utils.errors import DomainError, InversionError, UnsupportedError
from utils.helpers import halton_box

logger = logging.getLogger(__name__)


def _solve_stack(H: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Solve H_k s_k = g_k row by row; singular rows get NaN steps"""
    try:
        return np.linalg.solve(H, G[..., None])[..., 0]
    except np.linalg.LinAlgError:
        steps = np.full_like(G, np.nan)
        for k in range(G.shape[0]):
            try:
                steps[k] = np.linalg.solve(H[k], G[k])
            except np.linalg.LinAlgError:
                pass
        return steps


def _solve_exact(H: List[List[Fraction]], b: List[Fraction]) -> Optional[List[Fraction]]:
    """Gauss-Jordan elimination over the rationals; None when H is singular"""
    n = len(b)
    rows = [list(H[i]) + [b[i]] for i in range(n)]
    for col in range(n):
        pivot = next((i for i in range(col, n) if rows[i][col] != 0), None)
        if pivot is None:
            return None
        rows[col], rows[pivot] = rows[pivot], rows[col]
        lead = rows[col][col]
        rows[col] = [v / lead for v in rows[col]]
        for i in range(n):
            if i != col and rows[i][col] != 0:
                factor = rows[i][col]
                rows[i] = [v - factor * p for v, p in zip(rows[i], rows[col])]
    return [rows[i][n] for i in range(n)]


class DualFamily:
    """Pencil F = F_{s,j,γ} with its Legendre conjugate F* and dual weight w*.

    ℛ_j = ∇F(𝔇) and V_j = ∇F(U) are represented implicitly: y belongs to them
    when gradient inversion converges to a preimage in 𝔇 (resp. U).
    """

    def __init__(self, spec: ManifoldSpec, s: int, j: Sequence[int],
                 gamma: Optional[Sequence[int]] = None,
                 weight: Optional[WeightFunction] = None,
                 inv_tol: Optional[float] = None):
        self.spec = spec
        self.F: PencilFunction = pencil_function(spec, s, j, gamma)
        self.weight = weight or standard_weight(spec)
        self.inv_tol = inv_tol or config.inv_tol
        self.domain = Ball(spec.x0, spec.domain_radius)
        self._safe_radius = 4.0 * spec.eps0 * (1.0 - 1e-9)

    @property
    def s(self) -> int:
        return self.F.s

    @property
    def j(self) -> Tuple[int, ...]:
        return self.F.j

    @property
    def support(self) -> Ball:
        return self.weight.support

    def get_status(self) -> Dict[str, object]:
        return {
            "s": self.s,
            "j": list(self.j),
            "gamma": list(self.F.gamma),
            "coefficients": [str(c) for c in self.F.coefficients],
            "inv_tol": self.inv_tol,
        }

    # gradient inversion

    def invert_gradient_batch(self, Y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Damped Newton on ∇F(x) = y for every row of Y, started at the ball center.

        Returns (X, converged). A step is halved until the residual decreases and
        the iterate stays inside the evaluation ball; rows that cannot decrease
        are frozen as failed.
        """
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        center = self.spec.center
        X = np.tile(center, (Y.shape[0], 1))
        stalled = np.zeros(Y.shape[0], dtype=bool)

        for _ in range(config.newton_max_iter):
            G = self.F.gradients(X) - Y
            converged = np.max(np.abs(G), axis=-1) <= self.inv_tol
            active = np.nonzero(~converged & ~stalled)[0]
            if active.size == 0:
                break

            X_act, Y_act, G_act = X[active], Y[active], G[active]
            step = _solve_stack(self.F.hessians(X_act), G_act)
            start_norm = np.linalg.norm(G_act, axis=-1)
            scale = np.ones(active.size)
            accepted = np.zeros(active.size, dtype=bool)
            trial = X_act.copy()

            for _ in range(config.newton_max_halvings):
                pending = np.nonzero(~accepted)[0]
                if pending.size == 0:
                    break
                candidate = X_act[pending] - scale[pending, None] * step[pending]
                inside = np.all(np.isfinite(candidate), axis=-1)
                inside[inside] = np.max(np.abs(candidate[inside] - center), axis=-1) < self._safe_radius
                new_norm = np.full(pending.size, np.inf)
                if inside.any():
                    residual = self.F.gradients(candidate[inside]) - Y_act[pending][inside]
                    new_norm[inside] = np.linalg.norm(residual, axis=-1)
                ok = inside & (new_norm < start_norm[pending])
                trial[pending[ok]] = candidate[ok]
                accepted[pending[ok]] = True
                scale[pending[~ok]] *= 0.5

            X[active[accepted]] = trial[accepted]
            stalled[active[~accepted]] = True

        residual = np.max(np.abs(self.F.gradients(X) - Y), axis=-1)
        return X, residual <= self.inv_tol

    def invert_gradient(self, y: Sequence[float]) -> np.ndarray:
        """x ∈ 𝔇 with |∇F(x) - y|_∞ ≤ inv_tol"""
        X, converged = self.invert_gradient_batch(np.asarray(y, dtype=float).reshape(1, -1))
        if not converged[0]:
            raise InversionError(f"DualFamily j={self.j}: Newton did not converge for y={tuple(y)}")
        if not self.domain.contains(X)[0]:
            raise DomainError(f"DualFamily j={self.j}: preimage {tuple(X[0])} of y lies outside 𝔇")
        return X[0]

    # conjugate function

    def conjugate_batch(self, Y: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(F*(Y), preimages, converged); F* is NaN where inversion failed"""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        X, converged = self.invert_gradient_batch(Y)
        values = np.full(Y.shape[0], np.nan)
        if converged.any():
            values[converged] = (np.sum(Y[converged] * X[converged], axis=-1)
                                 - self.F.values(X[converged]))
        return values, X, converged

    def conjugate(self, y: Sequence[float]) -> float:
        """F*(y) = y·x - F(x) at x = (∇F)⁻¹(y)"""
        x = self.invert_gradient(y)
        return float(np.dot(np.asarray(y, dtype=float), x) - self.F.values(x)[0])

    @cached_property
    def _affine_gradient(self) -> Optional[Tuple[List[List[Fraction]], List[Fraction], ExactPolynomial]]:
        """(H, b, F) with ∇F(x) = Hx + b exactly, when F is an exact polynomial of degree ≤ 2"""
        poly = self.F.exact_poly
        if poly is None or poly.degree > 2:
            return None
        origin = [Fraction(0)] * self.F.n
        H = [[h.value_exact(origin) for h in row] for row in poly.hessian_polys]
        b = [g.value_exact(origin) for g in poly.gradient_polys]
        return H, b, poly

    @property
    def has_exact_conjugate(self) -> bool:
        return self._affine_gradient is not None

    def conjugate_exact(self, y: Sequence[Fraction]) -> Fraction:
        """F*(y) in rational arithmetic for quadratic pencils.

        The preimage solves Hx = y - b exactly; it is not checked against 𝔇.
        """
        if self._affine_gradient is None:
            raise UnsupportedError(f"DualFamily j={self.j}: exact conjugate needs a quadratic pencil")
        H, b, poly = self._affine_gradient
        y = [Fraction(v) for v in y]
        x = _solve_exact(H, [yi - bi for yi, bi in zip(y, b)])
        if x is None:
            raise InversionError(f"DualFamily j={self.j}: H_F is singular")
        return sum((yi * xi for yi, xi in zip(y, x)), Fraction(0)) - poly.value_exact(x)

    def conjugate_gradient(self, y: Sequence[float]) -> np.ndarray:
        """∇F*(y) = (∇F)⁻¹(y)"""
        return self.invert_gradient(y)

    def conjugate_hessian(self, y: Sequence[float]) -> np.ndarray:
        """H_{F*}(y) = H_F(x)⁻¹"""
        x = self.invert_gradient(y)
        return np.linalg.inv(self.F.hessians(x)[0])

    def biconjugate(self, x: Sequence[float]) -> float:
        """F**(x) = x·y - F*(y) at y = ∇F(x)"""
        x = np.asarray(x, dtype=float)
        y = self.F.gradients(x)[0]
        return float(np.dot(x, y) - self.conjugate(y))

    # dual weight and Hessian factor

    def dual_weight_batch(self, Y: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(w*(Y), preimages, converged); zero wherever inversion fails or leaves U"""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        X, converged = self.invert_gradient_batch(Y)
        weights = np.zeros(Y.shape[0])
        if converged.any():
            weights[converged] = self.weight(X[converged])
        return weights, X, converged

    def dual_weight(self, y: Sequence[float]) -> float:
        """w*(y) = w((∇F)⁻¹(y)), zero outside V_j"""
        weights, _, _ = self.dual_weight_batch(np.asarray(y, dtype=float).reshape(1, -1))
        return float(weights[0])

    def hessian_det_at_preimage(self, y: Sequence[float]) -> float:
        """|det H_F((∇F)⁻¹(y))|"""
        x = self.invert_gradient(y)
        return float(abs(np.linalg.det(self.F.hessians(x)[0])))

    def dual_amplitude_batch(self, Z: np.ndarray) -> np.ndarray:
        """w*(z) / √|det H_F((∇F)⁻¹(z))|, the amplitude of the dual integrals"""
        weights, X, converged = self.dual_weight_batch(Z)
        out = np.zeros_like(weights)
        live = converged & (weights > 0)
        if live.any():
            dets = np.abs(np.linalg.det(self.F.hessians(X[live])))
            out[live] = weights[live] / np.sqrt(dets)
        return out


def corner_points(center: Sequence[float], radius: float) -> np.ndarray:
    center = np.asarray(center, dtype=float)
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=center.size)))
    return center + radius * signs


def gradient_envelope(spec: ManifoldSpec, weight: WeightFunction, s: int,
                      ratio_range: Tuple[float, float] = (0.0, 1.0),
                      samples: int = 256, pad: float = 0.05) -> Tuple[np.ndarray, np.ndarray]:
    """Bounding box 𝔏 of ∇F_{s,j}(U) over all pencils with ratios j_r/j_s in ratio_range.

    ∇F is affine in the ratios, so the extreme pencils (ratios at the interval
    ends) bound every pencil; U is sampled at its corners plus a Halton set.
    """
    support = weight.support
    X = np.vstack([corner_points(support.center, support.radius),
                   halton_box(support.center, support.radius, samples)])
    base = spec.gradients(s, X)
    others = [r for r in range(1, spec.R + 1) if r != s]
    lows = np.full(spec.n, np.inf)
    highs = np.full(spec.n, -np.inf)
    for ratios in itertools.product(ratio_range, repeat=len(others)):
        G = base.copy()
        for t, r in zip(ratios, others):
            G += t * spec.gradients(r, X)
        lows = np.minimum(lows, G.min(axis=0))
        highs = np.maximum(highs, G.max(axis=0))
    margin = pad * np.maximum(highs - lows, 1e-12) + 1e-9
    return lows - margin, highs + margin


def involution_residual(family: DualFamily, samples: int = 100) -> float:
    """max |F**(x) - F(x)| over sampled x ∈ 𝔇"""
    X = halton_box(family.spec.x0, family.spec.domain_radius, samples)
    Y = family.F.gradients(X)
    conj, _, converged = family.conjugate_batch(Y)
    if not converged.all():
        raise InversionError(f"DualFamily j={family.j}: inversion failed on interior samples")
    biconj = np.sum(X * Y, axis=-1) - conj
    return float(np.max(np.abs(biconj - family.F.values(X))))


def inverse_hessian_residual(family: DualFamily, samples: int = 100) -> float:
    """max |H_{F*}(∇F(x)) · H_F(x) - I| over sampled x ∈ 𝔇"""
    X = halton_box(family.spec.x0, family.spec.domain_radius, samples)
    Y = family.F.gradients(X)
    preimages, converged = family.invert_gradient_batch(Y)
    if not converged.all():
        raise InversionError(f"DualFamily j={family.j}: inversion failed on interior samples")
    H = family.F.hessians(X)
    H_star = np.linalg.inv(family.F.hessians(preimages))
    product = H_star @ H
    return float(np.max(np.abs(product - np.eye(family.spec.n))))


def gradient_inversion_residual(family: DualFamily, samples: int = 100) -> float:
    """max |(∇F)⁻¹(∇F(x)) - x|_∞ over sampled x ∈ 𝔇"""
    X = halton_box(family.spec.x0, family.spec.domain_radius, samples)
    preimages, converged = family.invert_gradient_batch(family.F.gradients(X))
    if not converged.all():
        raise InversionError(f"DualFamily j={family.j}: inversion failed on interior samples")
    return float(np.max(np.abs(preimages - X)))
