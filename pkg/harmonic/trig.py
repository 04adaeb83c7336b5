"""
Trigonometric Polynomials - Selberg majorant/minorant pairs and the Fejér kernel
"""

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Optional, Tuple, Union

import numpy as np

from utils.errors import ParameterError

Theta = Union[float, np.ndarray]

IMAG_DISCARD_TOL = 1e-12
IMAG_FAIL_TOL = 1e-9
FEJER_FLOOR = 4.0 / math.pi ** 2


class TrigKind(Enum):
    SELBERG_PLUS = "selberg_plus"
    SELBERG_MINUS = "selberg_minus"
    FEJER = "fejer"
    GENERIC = "generic"


@dataclass(frozen=True, eq=False)
class TrigPolynomial:
    """Real-valued Σ_{|j|≤J} ĉ(j) e(jθ) on ℝ/ℤ.

    coefficients[j + J] holds ĉ(j). For Selberg polynomials the mean is kept
    exactly as (β - α) + mean_offset with mean_offset = ±1/(J+1).
    """
    degree: int
    coefficients: np.ndarray
    kind: TrigKind
    interval: Optional[Tuple[float, float]] = None
    mean_offset: Optional[Fraction] = None

    def __post_init__(self):
        if self.coefficients.shape != (2 * self.degree + 1,):
            raise ParameterError(f"expected {2 * self.degree + 1} coefficients for degree {self.degree}")

    @classmethod
    def zero(cls) -> "TrigPolynomial":
        return cls(degree=0, coefficients=np.zeros(1, dtype=complex), kind=TrigKind.GENERIC)

    def coefficient(self, j: int) -> complex:
        if abs(j) > self.degree:
            return 0j
        return complex(self.coefficients[j + self.degree])

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(-self.degree, self.degree + 1)

    def exact_mean(self) -> float:
        """ĉ(0) from the exact representation when one is stored"""
        if self.interval is not None and self.mean_offset is not None:
            alpha, beta = self.interval
            return (beta - alpha) + float(self.mean_offset)
        return self.coefficient(0).real

    def complex_values(self, theta: Theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        phases = np.exp(2j * np.pi * np.multiply.outer(theta, self.frequencies))
        return phases @ self.coefficients

    def horner(self, theta: Theta) -> np.ndarray:
        """Σ ĉ(j) e(jθ) by Horner's rule in z = e(θ)"""
        theta = np.asarray(theta, dtype=float)
        z = np.exp(2j * np.pi * theta)
        acc = np.zeros_like(z)
        for c in self.coefficients[::-1]:
            acc = acc * z + c
        return acc * np.exp(-2j * np.pi * self.degree * theta)

    def is_conjugate_symmetric(self, tol: float = 1e-15) -> bool:
        return bool(np.all(np.abs(self.coefficients - np.conj(self.coefficients[::-1])) <= tol))

    def get_status(self) -> Dict[str, object]:
        return {
            "kind": self.kind.value,
            "degree": self.degree,
            "mean": self.exact_mean(),
            "coefficients": [[float(c.real), float(c.imag)] for c in self.coefficients],
        }


def evaluate(p: TrigPolynomial, theta: Theta) -> Union[float, np.ndarray]:
    """Real value of p at θ; a non-negligible imaginary residue is a bug"""
    values = p.complex_values(theta)
    residue = float(np.max(np.abs(values.imag))) if np.size(values) else 0.0
    if residue > IMAG_FAIL_TOL:
        raise AssertionError(f"trigonometric polynomial has imaginary residue {residue:.3g}")
    real = values.real
    return float(real) if np.ndim(real) == 0 else real


def _vaaler_phi(u: np.ndarray) -> np.ndarray:
    """φ(u) = πu(1-|u|)cot(π|u|) + |u| on 0 < |u| < 1"""
    u = np.abs(u)
    return np.pi * u * (1.0 - u) / np.tan(np.pi * u) + u


def selberg_pair(alpha: float, beta: float, J: int) -> Tuple[TrigPolynomial, TrigPolynomial]:
    """(S_J-, S_J+) sandwiching the indicator of (α, β) on ℝ/ℤ.

    Built from Vaaler's approximation ψ* of the sawtooth ψ(x) = {x} - ½ and the
    error kernel K with |ψ - ψ*| ≤ K / (2(J+1)).
    """
    length = beta - alpha
    if not 0 < length < 1:
        raise ParameterError(f"interval ({alpha}, {beta}) must have length in (0, 1)")
    if J < 1:
        raise ParameterError(f"Selberg degree J={J} must be positive")

    freqs = np.arange(-J, J + 1)
    nonzero = freqs != 0
    scale = J + 1

    psi_star = np.zeros(2 * J + 1, dtype=complex)
    psi_star[nonzero] = -_vaaler_phi(freqs[nonzero] / scale) / (2j * np.pi * freqs[nonzero])
    kernel = 1.0 - np.abs(freqs) / scale

    shift_beta = np.exp(-2j * np.pi * freqs * beta)
    shift_alpha = np.exp(-2j * np.pi * freqs * alpha)

    jump = psi_star * (shift_beta - shift_alpha)
    cushion = kernel * (shift_beta + shift_alpha) / (2 * scale)

    pair = []
    for sign, kind in ((-1, TrigKind.SELBERG_MINUS), (1, TrigKind.SELBERG_PLUS)):
        coefficients = jump + sign * cushion
        offset = Fraction(sign, scale)
        coefficients[J] = length + float(offset)
        pair.append(TrigPolynomial(degree=J, coefficients=coefficients, kind=kind,
                                   interval=(alpha, beta), mean_offset=offset))
    return pair[0], pair[1]


def selberg_coefficient_bound(p: TrigPolynomial, j: int) -> float:
    """1/(J+1) + min(β - α, 1/(π|j|))"""
    alpha, beta = p.interval
    cap = beta - alpha if j == 0 else min(beta - alpha, 1.0 / (math.pi * abs(j)))
    return 1.0 / (p.degree + 1) + cap


def indicator(alpha: float, beta: float, theta: Theta) -> np.ndarray:
    """𝟙_(α,β) on ℝ/ℤ (open interval, lifted modulo 1)"""
    theta = np.asarray(theta, dtype=float)
    shifted = np.mod(theta - alpha, 1.0)
    return ((shifted > 0) & (shifted < beta - alpha)).astype(float)


def fejer(D: int) -> TrigPolynomial:
    """ℱ_D with ĉ(d) = (D - |d|)/D²"""
    if D < 1:
        raise ParameterError(f"Fejér degree D={D} must be positive")
    freqs = np.arange(-D, D + 1)
    coefficients = ((D - np.abs(freqs)) / D ** 2).astype(complex)
    return TrigPolynomial(degree=D, coefficients=coefficients, kind=TrigKind.FEJER)


def fejer_closed_form(D: int, theta: Theta) -> np.ndarray:
    """(sin(πDθ) / (D sin(πθ)))², equal to 1 on ℤ"""
    theta = np.asarray(theta, dtype=float)
    denominator = D * np.sin(np.pi * theta)
    at_integer = np.isclose(np.mod(theta + 0.5, 1.0) - 0.5, 0.0, atol=1e-15)
    safe = np.where(at_integer, 1.0, denominator)
    return np.where(at_integer, 1.0, (np.sin(np.pi * D * theta) / safe) ** 2)


def fejer_degree(delta_star: float) -> int:
    return math.floor(1.0 / (2.0 * delta_star))


def fejer_minorant_check(delta_star: float, grid: int = 1024) -> bool:
    """ℱ_D ≥ 4/π² on the window ‖θ‖ ≤ δ*, D = ⌊1/(2δ*)⌋"""
    if not 0 < delta_star < 0.5:
        raise ParameterError(f"delta_star={delta_star} must lie in (0, 1/2)")
    D = fejer_degree(delta_star)
    if D < 1:
        raise ParameterError(f"delta_star={delta_star} gives Fejér degree {D}")
    theta = np.arange(grid) / grid
    window = np.minimum(theta, 1.0 - theta) <= delta_star
    points = np.concatenate([theta[window], [delta_star, -delta_star]])
    values = evaluate(fejer(D), points)
    return bool(np.all(values >= FEJER_FLOOR - IMAG_DISCARD_TOL))
