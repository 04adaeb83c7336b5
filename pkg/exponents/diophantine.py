"""
Diophantine Approximation - Hausdorff dimension of τ-approximable points on M and
the convergence test for the associated Hausdorff-measure series
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional, Sequence, Tuple, Union

from utils.errors import ParameterError, RangeError, UnsupportedError

Rational = Union[int, Fraction, str]


class SeriesVerdict(Enum):
    CONVERGES = "converges"
    DIVERGES = "diverges"


@dataclass(frozen=True)
class ApproximationProfile:
    """Rates ψ_r(q) = q^(-τ_r) for r = 0..R.

    General monotone ψ_r may be attached through `psi`; only the power
    subclass is decided exactly.
    """
    tau: Tuple[Fraction, ...]
    psi: Optional[Tuple[Callable[[int], float], ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "tau", tuple(Fraction(t) for t in self.tau))
        if len(self.tau) < 2:
            raise ParameterError("a profile needs τ₀ and at least one τ_r")

    @classmethod
    def of(cls, values: Sequence[Rational]) -> "ApproximationProfile":
        return cls(tuple(Fraction(v) for v in values))

    @property
    def R(self) -> int:
        return len(self.tau) - 1

    @property
    def tau0(self) -> Fraction:
        return self.tau[0]

    @property
    def rest(self) -> Tuple[Fraction, ...]:
        return self.tau[1:]

    @property
    def is_power(self) -> bool:
        return self.psi is None


def _check_profile(R: int, profile: ApproximationProfile) -> None:
    if profile.R != R:
        raise ParameterError(f"profile has {profile.R} codimension rates, expected {R}")
    if profile.tau0 < max(profile.rest):
        raise RangeError(f"τ₀={profile.tau0} must dominate every τ_r")


def hausdorff_dimension(n: int, R: int, profile: ApproximationProfile) -> Fraction:
    """(n+R+1+Σ(τ₀-τ_r))/(τ₀+1) - R for τ ∈ [1/n, 1/R)^(R+1)"""
    _check_profile(R, profile)
    low, high = Fraction(1, n), Fraction(1, R)
    if any(not low <= t < high for t in profile.tau):
        raise RangeError(f"every τ_r must lie in [{low}, {high})")
    tau0 = profile.tau0
    return (n + R + 1 + sum(tau0 - t for t in profile.rest)) / (tau0 + 1) - R


def series_exponent(n: int, profile: ApproximationProfile, s: Rational) -> Fraction:
    """Exponent e of Σ q^e = Σ qⁿ (ψ₀(q)/q)^s Π ψ_r(q)"""
    s = Fraction(s)
    return n - s * (profile.tau0 + 1) - sum(profile.rest)


def critical_exponent(n: int, profile: ApproximationProfile) -> Fraction:
    """The s at which the series exponent equals -1"""
    return (n + 1 - sum(profile.rest)) / (profile.tau0 + 1)


def khintchine_series_converges(n: int, R: int, profile: ApproximationProfile,
                                s: Rational) -> SeriesVerdict:
    """Decide Σ qⁿ (ψ₀(q)/q)^s Π ψ_r(q) < ∞ exactly on the rational exponent"""
    if not profile.is_power:
        raise UnsupportedError("only power approximation functions q^(-τ) are decided")
    _check_profile(R, profile)
    s = Fraction(s)
    if not s > Fraction(n * R, R + 1):
        raise RangeError(f"s={s} must exceed nR/(R+1)={Fraction(n * R, R + 1)}")
    if series_exponent(n, profile, s) < -1:
        return SeriesVerdict.CONVERGES
    return SeriesVerdict.DIVERGES
