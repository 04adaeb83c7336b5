"""
Weights and Widths - sup-norm balls, smooth bump weights w and the width vector δ⃗
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Dict, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from utils.config import config
from utils.errors import ParameterError


@dataclass(frozen=True)
class Ball:
    """Closed sup-norm ball B̄_radius(center)"""
    center: Tuple[float, ...]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ParameterError(f"ball radius {self.radius} must be positive")

    @property
    def n(self) -> int:
        return len(self.center)

    def contains(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.max(np.abs(X - np.asarray(self.center)), axis=-1) <= self.radius


class WeightProfile(Enum):
    STANDARD_BUMP = "standard_bump"
    COSINE_TAPER = "cosine_taper"


def _profile_values(profile: WeightProfile, t: np.ndarray) -> np.ndarray:
    """One-dimensional profile ψ on [-1, 1] with ψ(0) = 1, zero outside"""
    t = np.abs(np.asarray(t, dtype=float))
    inside = t < 1.0
    out = np.zeros_like(t)
    if profile is WeightProfile.STANDARD_BUMP:
        # exp(1 - 1/(1 - t²)), C^∞
        ti = t[inside]
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - ti * ti))
    else:
        # cos⁶(πt/2), C^5
        out[inside] = np.cos(0.5 * np.pi * t[inside]) ** 6
    return out


def _profile_integral(profile: WeightProfile, panels: int, order: int = 16) -> float:
    """∫_{-1}^{1} ψ by composite Gauss-Legendre"""
    nodes, weights = leggauss(order)
    edges = np.linspace(-1.0, 1.0, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    points = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    scaled = (half[:, None] * weights[None, :]).ravel()
    return float(np.sum(scaled * _profile_values(profile, points)))


@dataclass(frozen=True)
class WeightFunction:
    """w(x) = Π_i ψ((x_i - c_i)/radius); values in [0, 1], supported in B̄_radius(center)"""
    center: Tuple[float, ...]
    radius: float
    profile: WeightProfile = WeightProfile.STANDARD_BUMP

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not isinstance(self.profile, WeightProfile):
            object.__setattr__(self, "profile", WeightProfile(self.profile))
        if not self.radius > 0:
            raise ParameterError(f"weight radius {self.radius} must be positive")

    @property
    def n(self) -> int:
        return len(self.center)

    @property
    def support(self) -> Ball:
        return Ball(self.center, self.radius)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        scaled = (X - np.asarray(self.center)) / self.radius
        return np.prod(_profile_values(self.profile, scaled), axis=-1)

    @cached_property
    def w_hat_zero(self) -> float:
        """∫w, confirmed by two quadrature refinements"""
        coarse = _profile_integral(self.profile, panels=32)
        fine = _profile_integral(self.profile, panels=64)
        if abs(fine - coarse) > config.weight_quadrature_rel_tol * abs(fine):
            raise ParameterError(
                f"weight integral not reproducible: {coarse!r} vs {fine!r}"
            )
        return (self.radius * fine) ** self.n

    def fits_inside(self, x0: Sequence[float], eps0: float) -> bool:
        """supp w ⊆ B̄_eps0(x0)"""
        offset = max(abs(c - x) for c, x in zip(self.center, x0))
        return offset + self.radius <= eps0 + 1e-15


def standard_weight(spec, profile: WeightProfile = WeightProfile.STANDARD_BUMP) -> WeightFunction:
    """Weight filling the parametrisation ball of a manifold"""
    return WeightFunction(center=spec.x0, radius=spec.eps0, profile=profile)


@dataclass(frozen=True)
class DeltaVector:
    """Per-codimension widths δ_r ∈ (0, ½) and their derived products"""
    deltas: Tuple[float, ...]
    exact: Tuple[Fraction, ...] = field(init=False, repr=False)

    def __post_init__(self):
        deltas = tuple(float(d) for d in self.deltas)
        if not deltas:
            raise ParameterError("at least one width is required")
        for d in deltas:
            if not 0 < d < 0.5:
                raise ParameterError(f"width {d} must lie in (0, 1/2)")
        object.__setattr__(self, "deltas", deltas)
        object.__setattr__(self, "exact", tuple(Fraction(d) for d in deltas))

    @classmethod
    def uniform(cls, delta: float, R: int) -> "DeltaVector":
        return cls(tuple([delta] * R))

    @property
    def R(self) -> int:
        return len(self.deltas)

    @property
    def delta_prod(self) -> float:
        """δ^× = Π δ_r"""
        return float(math.prod(self.exact))

    def delta_prod_r(self, r: int) -> float:
        """δ^×_r = δ^× / δ_r (1-based r)"""
        return float(self.delta_prod_r_exact(r))

    def delta_prod_exact(self) -> Fraction:
        return math.prod(self.exact)

    def delta_prod_r_exact(self, r: int) -> Fraction:
        if not 1 <= r <= self.R:
            raise IndexError(f"codimension index {r} outside 1..{self.R}")
        return math.prod(d for k, d in enumerate(self.exact) if k != r - 1)

    @property
    def selberg_degrees(self) -> Tuple[int, ...]:
        """J_r = ⌊1/(2δ_r)⌋"""
        return tuple(math.floor(1 / (2 * d)) for d in self.exact)

    def get_status(self) -> Dict[str, object]:
        return {
            "deltas": list(self.deltas),
            "delta_prod": self.delta_prod,
            "selberg_degrees": list(self.selberg_degrees),
        }
