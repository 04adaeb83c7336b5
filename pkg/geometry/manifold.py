"""
Manifolds - graphs x ↦ (x, f_1(x), ..., f_R(x)) over a sup-norm ball, their
derivatives, the curvature checker and Radon-Hurwitz admissibility
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from geometry.polynomials import ExactPolynomial, quadratic_form
from utils.config import config
from utils.errors import DomainError, ParameterError
from utils.helpers import halton_box

logger = logging.getLogger(__name__)


class ManifoldFamily(Enum):
    PARABOLOID = "paraboloid"
    DIAG_QUADRIC = "diag-quadric"
    COMPLEX_SQUARING = "complex-squaring"
    POLYNOMIAL = "polynomial"


@dataclass(frozen=True)
class ManifoldSpec:
    """A compact graph manifold of dimension n and codimension R.

    Codimension indices r are 1-based. Evaluation is allowed on the open
    sup-norm ball B_{4·eps0}(x0); the parametrisation ball is B̄_{eps0}(x0) and
    the working domain 𝔇 is B̄_{2·eps0}(x0).
    """
    n: int
    R: int
    x0: Tuple[float, ...]
    eps0: float
    family: ManifoldFamily
    params: Tuple[Fraction, ...] = ()
    exact_polys: Optional[Tuple[ExactPolynomial, ...]] = None

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError(f"ManifoldSpec: dimension n={self.n} must be at least 2")
        if self.R < 1:
            raise ParameterError(f"ManifoldSpec: codimension R={self.R} must be positive")
        if len(self.x0) != self.n:
            raise ParameterError(f"ManifoldSpec: center has {len(self.x0)} coordinates, expected {self.n}")
        if not self.eps0 > 0:
            raise ParameterError(f"ManifoldSpec: eps0={self.eps0} must be positive")
        if self.exact_polys is not None and len(self.exact_polys) != self.R:
            raise ParameterError("ManifoldSpec: one exact polynomial per codimension is required")

        rh = radon_hurwitz(self.n)
        if self.R > rh:
            logger.warning(
                "ManifoldSpec: R=%d exceeds RH(%d)=%d, the curvature check decides admissibility",
                self.R, self.n, rh,
            )
        if self.exact_polys is not None:
            self._check_exact_agreement()

    # bookkeeping

    @property
    def center(self) -> np.ndarray:
        return np.asarray(self.x0, dtype=float)

    @property
    def domain_radius(self) -> float:
        """Radius of 𝔇 = B̄_{2·eps0}(x0)"""
        return 2.0 * self.eps0

    def check_index(self, r: int) -> None:
        if not isinstance(r, (int, np.integer)) or not 1 <= r <= self.R:
            raise IndexError(f"codimension index {r} outside 1..{self.R}")

    def check_domain(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[-1] != self.n:
            raise DomainError(f"points have {X.shape[-1]} coordinates, expected {self.n}")
        if X.size:
            offset = np.max(np.abs(X - self.center), axis=-1)
            if np.any(offset >= 4.0 * self.eps0):
                raise DomainError(
                    f"point at sup-distance {float(np.max(offset)):.6g} from x0 lies outside B_(4·eps0)"
                )
        return X

    # vectorized evaluation

    def values(self, r: int, X: np.ndarray) -> np.ndarray:
        self.check_index(r)
        X = self.check_domain(X)
        if self.family is ManifoldFamily.PARABOLOID:
            return 0.5 * np.sum(X * X, axis=-1)
        if self.family is ManifoldFamily.DIAG_QUADRIC:
            c = np.array([float(v) for v in self.params])
            return 0.5 * np.sum(c * X * X, axis=-1)
        if self.family is ManifoldFamily.COMPLEX_SQUARING:
            if r == 1:
                return 0.5 * (X[:, 0] ** 2 - X[:, 1] ** 2)
            return X[:, 0] * X[:, 1]
        return self.exact_polys[r - 1].values(X)

    def gradients(self, r: int, X: np.ndarray) -> np.ndarray:
        self.check_index(r)
        X = self.check_domain(X)
        if self.family is ManifoldFamily.PARABOLOID:
            return X.copy()
        if self.family is ManifoldFamily.DIAG_QUADRIC:
            c = np.array([float(v) for v in self.params])
            return c * X
        if self.family is ManifoldFamily.COMPLEX_SQUARING:
            if r == 1:
                return np.stack([X[:, 0], -X[:, 1]], axis=-1)
            return np.stack([X[:, 1], X[:, 0]], axis=-1)
        return self.exact_polys[r - 1].gradients(X)

    def hessians(self, r: int, X: np.ndarray) -> np.ndarray:
        self.check_index(r)
        X = self.check_domain(X)
        count = X.shape[0]
        if self.family is ManifoldFamily.PARABOLOID:
            return np.broadcast_to(np.eye(self.n), (count, self.n, self.n)).copy()
        if self.family is ManifoldFamily.DIAG_QUADRIC:
            c = np.diag([float(v) for v in self.params])
            return np.broadcast_to(c, (count, self.n, self.n)).copy()
        if self.family is ManifoldFamily.COMPLEX_SQUARING:
            h = np.diag([1.0, -1.0]) if r == 1 else np.array([[0.0, 1.0], [1.0, 0.0]])
            return np.broadcast_to(h, (count, 2, 2)).copy()
        return self.exact_polys[r - 1].hessians(X)

    def _check_exact_agreement(self) -> None:
        samples = halton_box(self.x0, self.domain_radius, config.exact_agreement_samples)
        for r in range(1, self.R + 1):
            floating = self.values(r, samples)
            poly = self.exact_polys[r - 1]
            for x, value in zip(samples, floating):
                exact = poly.value_exact([Fraction(float(v)) for v in x])
                if abs(float(exact) - value) > config.exact_agreement_tol * max(1.0, abs(float(exact))):
                    raise ParameterError(
                        f"ManifoldSpec: exact and floating f_{r} disagree at {tuple(x)}: {exact} vs {value}"
                    )


# built-in families

def _center(n: int, x0: Optional[Sequence[float]]) -> Tuple[float, ...]:
    return tuple(float(v) for v in x0) if x0 is not None else (0.0,) * n


def paraboloid(n: int, x0: Optional[Sequence[float]] = None, eps0: float = 0.25) -> ManifoldSpec:
    """f(x) = ½|x|²"""
    poly = quadratic_form({(i, i): Fraction(1, 2) for i in range(n)}, n)
    return ManifoldSpec(n=n, R=1, x0=_center(n, x0), eps0=eps0,
                        family=ManifoldFamily.PARABOLOID, exact_polys=(poly,))


def diag_quadric(c: Sequence, x0: Optional[Sequence[float]] = None, eps0: float = 0.25) -> ManifoldSpec:
    """f(x) = ½ Σ c_i x_i², every c_i nonzero"""
    coefficients = tuple(Fraction(v) for v in c)
    if any(v == 0 for v in coefficients):
        raise ParameterError("diag-quadric coefficients must all be nonzero")
    n = len(coefficients)
    poly = quadratic_form({(i, i): v / 2 for i, v in enumerate(coefficients)}, n)
    return ManifoldSpec(n=n, R=1, x0=_center(n, x0), eps0=eps0,
                        family=ManifoldFamily.DIAG_QUADRIC, params=coefficients, exact_polys=(poly,))


def complex_squaring(x0: Optional[Sequence[float]] = None, eps0: float = 0.25) -> ManifoldSpec:
    """z ↦ z²/2 on ℂ ≅ ℝ²: f_1 = ½(x₁² - x₂²), f_2 = x₁x₂"""
    f1 = quadratic_form({(0, 0): Fraction(1, 2), (1, 1): Fraction(-1, 2)}, 2)
    f2 = quadratic_form({(0, 1): Fraction(1)}, 2)
    return ManifoldSpec(n=2, R=2, x0=_center(2, x0), eps0=eps0,
                        family=ManifoldFamily.COMPLEX_SQUARING, exact_polys=(f1, f2))


def user_polynomial(n: int, polys: Sequence, x0: Optional[Sequence[float]] = None,
                    eps0: float = 0.25) -> ManifoldSpec:
    """Arbitrary rational polynomials, given as ExactPolynomial or exponent -> coefficient maps"""
    exact = tuple(p if isinstance(p, ExactPolynomial) else ExactPolynomial(n, p) for p in polys)
    return ManifoldSpec(n=n, R=len(exact), x0=_center(n, x0), eps0=eps0,
                        family=ManifoldFamily.POLYNOMIAL, exact_polys=exact)


# operations

def evaluate(spec: ManifoldSpec, r: int, x: Sequence[float]) -> Tuple[float, np.ndarray, np.ndarray]:
    """f_r(x), ∇f_r(x) and H_{f_r}(x) at a single point"""
    X = np.asarray(x, dtype=float).reshape(1, -1)
    return (float(spec.values(r, X)[0]), spec.gradients(r, X)[0], spec.hessians(r, X)[0])


@dataclass
class CurvatureReport:
    """Sampled |det H_{t·f}| extremes over the unit t-sphere and 𝔇"""
    min_abs_det: float
    max_abs_det: float
    frak_C0: float
    samples_t: int
    samples_x: int
    admissible: bool
    pencil_min_abs_det: float = math.nan
    pencil_max_abs_det: float = math.nan

    def get_status(self) -> Dict[str, float]:
        return {
            "min_abs_det": self.min_abs_det,
            "max_abs_det": self.max_abs_det,
            "frak_C0": self.frak_C0,
            "samples_t": self.samples_t,
            "samples_x": self.samples_x,
            "admissible": self.admissible,
            "pencil_min_abs_det": self.pencil_min_abs_det,
            "pencil_max_abs_det": self.pencil_max_abs_det,
        }


def sphere_grid(R: int, count: int) -> np.ndarray:
    """Deterministic points on the unit sphere of ℝ^R.

    R = 1 gives the single point 1 (det H_{-t} = ±det H_t makes -1 redundant),
    R = 2 equally spaced angles, R ≥ 3 a tensor grid of hyperspherical angles.
    """
    if R == 1:
        return np.ones((1, 1))
    if R == 2:
        angles = 2.0 * np.pi * np.arange(count) / count
        return np.stack([np.cos(angles), np.sin(angles)], axis=-1)

    per_axis = max(2, math.ceil(count ** (1.0 / (R - 1))))
    polar = (np.arange(per_axis) + 0.5) * np.pi / per_axis
    azimuth = 2.0 * np.pi * np.arange(per_axis) / per_axis
    grids = np.meshgrid(*([polar] * (R - 2) + [azimuth]), indexing="ij")
    angles = np.stack([g.ravel() for g in grids], axis=-1)[:count]

    points = np.ones((angles.shape[0], R))
    for k in range(R - 1):
        points[:, k] *= np.cos(angles[:, k])
        points[:, k + 1:] *= np.sin(angles[:, k])[:, None]
    return points


def _stacked_hessians(spec: ManifoldSpec, X: np.ndarray) -> np.ndarray:
    """(R, N, n, n) array of H_{f_r}(x)"""
    return np.stack([spec.hessians(r, X) for r in range(1, spec.R + 1)])


def check_curvature(spec: ManifoldSpec, t_samples: Optional[int] = None,
                    x_samples: Optional[int] = None) -> CurvatureReport:
    """Sample |det H_{Σ t_r f_r}(x)| for t on the unit sphere and x in 𝔇.

    det H_{λt} = λⁿ det H_t, so the unit sphere carries all the information.
    """
    t_samples = t_samples or config.curvature_t_samples
    x_samples = x_samples or config.curvature_x_samples
    if t_samples < 1 or x_samples < 1:
        raise ParameterError("check_curvature needs at least one t and one x sample")

    T = sphere_grid(spec.R, t_samples)
    X = halton_box(spec.x0, spec.domain_radius, x_samples)
    H = _stacked_hessians(spec, X)

    combined = np.einsum("tr,rnij->tnij", T, H)
    dets = np.abs(np.linalg.det(combined))
    min_abs, max_abs = float(dets.min()), float(dets.max())

    # pencils f_s + Σ_{r≠s} t_r f_r with t_r ∈ [-2, 2]
    ticks = np.linspace(-2.0, 2.0, 5)
    pencil_dets = []
    for s in range(spec.R):
        others = [r for r in range(spec.R) if r != s]
        grids = np.meshgrid(*([ticks] * len(others)), indexing="ij") if others else []
        mixes = np.stack([g.ravel() for g in grids], axis=-1) if others else np.zeros((1, 0))
        for mix in mixes:
            combo = H[s] + sum(t * H[r] for t, r in zip(mix, others))
            pencil_dets.append(np.abs(np.linalg.det(combo)))
    pencil_dets = np.concatenate(pencil_dets)
    pencil_min, pencil_max = float(pencil_dets.min()), float(pencil_dets.max())

    admissible = min_abs > config.curvature_zero_tol
    if admissible and pencil_min > config.curvature_zero_tol:
        frak_C0 = max(1.0, max_abs, 1.0 / min_abs, pencil_max, 1.0 / pencil_min)
    else:
        frak_C0 = math.inf
    if not admissible:
        logger.warning("CurvatureCheck: sampled min |det H| = %.3g, curvature condition fails", min_abs)

    return CurvatureReport(
        min_abs_det=min_abs, max_abs_det=max_abs, frak_C0=frak_C0,
        samples_t=T.shape[0], samples_x=X.shape[0], admissible=admissible,
        pencil_min_abs_det=pencil_min, pencil_max_abs_det=pencil_max,
    )


def radon_hurwitz_decomposition(n: int) -> Tuple[int, int, int]:
    """(n₁, n₂, n₃) with n = (2n₁+1)·2^{4n₂+n₃}, n₃ ∈ {0,1,2,3}"""
    if n < 1:
        raise ParameterError(f"Radon-Hurwitz numbers need n ≥ 1, got {n}")
    k = (n & -n).bit_length() - 1
    n2, n3 = divmod(k, 4)
    return (n >> k) // 2, n2, n3


def radon_hurwitz(n: int) -> int:
    _, n2, n3 = radon_hurwitz_decomposition(n)
    return 8 * n2 + 2 ** n3


@dataclass(frozen=True)
class PencilFunction:
    """F = γ_s f_s + Σ_{r≠s} γ_r (j_r/j_s) f_r with exact mixing coefficients"""
    spec: ManifoldSpec
    s: int
    j: Tuple[int, ...]
    gamma: Tuple[int, ...]
    coefficients: Tuple[Fraction, ...] = field(init=False)

    def __post_init__(self):
        spec = self.spec
        spec.check_index(self.s)
        if len(self.j) != spec.R or len(self.gamma) != spec.R:
            raise ParameterError(f"pencil index and sign vector need {spec.R} entries")
        if any(g not in (-1, 1) for g in self.gamma):
            raise ParameterError(f"sign vector {self.gamma} must have entries ±1")
        j_s = self.j[self.s - 1]
        if j_s == 0:
            raise IndexError(f"pencil index {self.j} has j_s = 0")
        top = max(abs(v) for v in self.j)
        if not 0 < top <= 2 * j_s:
            raise ParameterError(f"pencil index {self.j} is outside the big pencil set for s={self.s}")
        coefficients = tuple(
            Fraction(self.gamma[r]) * (1 if r == self.s - 1 else Fraction(self.j[r], j_s))
            for r in range(spec.R)
        )
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def n(self) -> int:
        return self.spec.n

    def values(self, X: np.ndarray) -> np.ndarray:
        return sum(float(c) * self.spec.values(r + 1, X)
                   for r, c in enumerate(self.coefficients) if c != 0)

    def gradients(self, X: np.ndarray) -> np.ndarray:
        return sum(float(c) * self.spec.gradients(r + 1, X)
                   for r, c in enumerate(self.coefficients) if c != 0)

    def hessians(self, X: np.ndarray) -> np.ndarray:
        return sum(float(c) * self.spec.hessians(r + 1, X)
                   for r, c in enumerate(self.coefficients) if c != 0)

    def evaluate(self, x: Sequence[float]) -> Tuple[float, np.ndarray, np.ndarray]:
        X = np.asarray(x, dtype=float).reshape(1, -1)
        return float(self.values(X)[0]), self.gradients(X)[0], self.hessians(X)[0]

    @property
    def exact_poly(self) -> Optional[ExactPolynomial]:
        if self.spec.exact_polys is None:
            return None
        total = ExactPolynomial(self.n, {})
        for c, poly in zip(self.coefficients, self.spec.exact_polys):
            total = total + poly.scale(c)
        return total


def pencil_function(spec: ManifoldSpec, s: int, j: Sequence[int],
                    gamma: Optional[Sequence[int]] = None) -> PencilFunction:
    """Build F_{s,j,γ}; γ defaults to all ones"""
    gamma = tuple(gamma) if gamma is not None else (1,) * spec.R
    return PencilFunction(spec=spec, s=s, j=tuple(int(v) for v in j), gamma=tuple(int(g) for g in gamma))
