"""
Exponent Calculus - exact rational Θ, β/α recursions, thresholds and error factors
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from geometry.manifold import radon_hurwitz
from utils.config import config
from utils.errors import InvariantError, ParameterError, RangeError, UnspecifiedBranch

logger = logging.getLogger(__name__)

Rational = Union[int, Fraction]

CONVERGENCE_GAP = Fraction(1, 2 ** 40)


def _check_dims(n: int, R: int) -> None:
    if n < 2 or R < 1:
        raise ParameterError(f"exponents need n ≥ 2 and R ≥ 1, got n={n}, R={R}")


def homogeneous_limit(n: int, R: int) -> Fraction:
    """n(n+R+1)/(n+2R), the fixed point of the β recursion"""
    return Fraction(n * (n + R + 1), n + 2 * R)


def _second_branch(n: int, R: int) -> Optional[Fraction]:
    """n+1 - nR/(n+2(R-1)-4/n), or None where the denominator is not positive"""
    denominator = n + 2 * (R - 1) - Fraction(4, n)
    if denominator <= 0:
        return None
    return n + 1 - Fraction(n * R) / denominator


def theta(n: int, R: int) -> Fraction:
    _check_dims(n, R)
    if R <= 2:
        return homogeneous_limit(n, R)
    return _second_branch(n, R)


def theta_max_form(n: int, R: int) -> Fraction:
    """max of both expressions for Θ, skipping a branch with vanishing denominator"""
    _check_dims(n, R)
    candidates = [homogeneous_limit(n, R)]
    second = _second_branch(n, R)
    if second is not None:
        candidates.append(second)
    return max(candidates)


def beta_stop(n: int, R: int) -> Fraction:
    _check_dims(n, R)
    return max(homogeneous_limit(n, R), Fraction(n * (n + 1), n + 2))


def alpha_stop(n: int, R: int) -> Fraction:
    _check_dims(n, R)
    return max(Fraction(n * (n + R + 1), n + 2), n + R - 1 - Fraction(2, n))


def _check_beta(n: int, R: int, beta: Fraction) -> Fraction:
    beta = Fraction(beta)
    if beta == homogeneous_limit(n, R):
        return beta
    low = beta_stop(n, R)
    if not low <= beta <= n + 1:
        raise RangeError(f"β={beta} outside [{low}, {n + 1}] for n={n}, R={R}")
    return beta


def beta_step(n: int, R: int, beta: Rational) -> Fraction:
    """n+1 - nR/(2R + n(1 - 2/(2β-n))); the fixed point is always accepted"""
    _check_dims(n, R)
    beta = _check_beta(n, R, beta)
    return n + 1 - Fraction(n * R) / (2 * R + n * (1 - Fraction(2) / (2 * beta - n)))


def alpha_from_beta(n: int, R: int, beta: Rational) -> Fraction:
    _check_dims(n, R)
    beta = _check_beta(n, R, beta)
    return max(n + R - Fraction(n) / (2 * beta - n), n + R - 1 - Fraction(2, n))


def alpha_first_branch_active(n: int, R: int, beta: Rational) -> bool:
    beta = Fraction(beta)
    return n + R - Fraction(n) / (2 * beta - n) >= n + R - 1 - Fraction(2, n)


def beta_from_alpha(n: int, R: int, alpha: Rational) -> Fraction:
    _check_dims(n, R)
    alpha = Fraction(alpha)
    low = Fraction(n * (n + R + 1), n + 2)
    if not low <= alpha <= n + R:
        raise RangeError(f"α={alpha} outside [{low}, {n + R}] for n={n}, R={R}")
    return n + 1 - Fraction(n * R) / (2 * alpha - n)


def contraction_ratio(n: int, R: int) -> Fraction:
    """4R/n², the per-step contraction of β_i towards the fixed point"""
    return Fraction(4 * R, n * n)


@dataclass
class BetaSequence:
    values: List[Fraction]
    steps_to_converge: int
    limit: Fraction
    stop_reason: str
    landing: Optional[Fraction] = None


def beta_sequence(n: int, R: int, max_steps: int = 64) -> BetaSequence:
    """Iterate β_i = beta_step(β_{i-1}) from β₀ = n+1.

    R ≤ 2 stops once β_i is within 2^-40 of the fixed point. R ≥ 3 stops at the
    first β_i below β_st, after which a final α/β composition at β_st must land
    exactly on Θ. The contraction bound β_i - limit ≤ (4R/n²)^i·R is checked at
    every iterate.
    """
    _check_dims(n, R)
    if max_steps < 1:
        raise ParameterError(f"max_steps={max_steps} must be positive")
    limit = homogeneous_limit(n, R)
    stop = beta_stop(n, R)
    ratio = contraction_ratio(n, R)

    values = [Fraction(n + 1)]
    reason = "max_steps"
    for i in range(1, max_steps + 1):
        current = beta_step(n, R, values[-1])
        values.append(current)
        if current - limit > ratio ** i * R:
            raise InvariantError(f"β_{i}={current} violates the contraction bound for n={n}, R={R}")
        if R <= 2 and current - limit < CONVERGENCE_GAP:
            reason = "converged"
            break
        if R >= 3 and current < stop:
            reason = "below_beta_st"
            break

    landing = None
    if R >= 3:
        landing = beta_from_alpha(n, R, alpha_from_beta(n, R, stop))
        if landing != theta(n, R):
            raise InvariantError(f"final composition lands at {landing}, expected Θ={theta(n, R)}")
    return BetaSequence(values, len(values) - 1, limit, reason, landing)


def delta_range_exponent(n: int, R: int) -> Fraction:
    """(Θ - (n+1))/R, checked against max(-(n+2)/(n+2R), -n/(n+2(R-1)-4/n))"""
    _check_dims(n, R)
    value = (theta(n, R) - (n + 1)) / R
    candidates = [-Fraction(n + 2, n + 2 * R)]
    denominator = n + 2 * (R - 1) - Fraction(4, n)
    if denominator > 0:
        candidates.append(-Fraction(n) / denominator)
    if max(candidates) != value:
        raise InvariantError(f"δ-range forms disagree for n={n}, R={R}: {value} vs {max(candidates)}")
    return value


def selberg_degree_exponent(n: int, R: int) -> Fraction:
    """Exponent e in the Selberg degree choice X = Q^e of the main-term argument"""
    _check_dims(n, R)
    return Fraction(n + 2, n + 2 * R)


def bootstrap_steps(n: int, R: int, Q: int) -> int:
    """Number of β/α bootstrap rounds used at height Q"""
    _check_dims(n, R)
    log4q = math.log(4 * Q)
    if n == 2:
        return math.floor(math.sqrt(log4q))
    steps = math.floor((math.log(R) + math.log(log4q)) / math.log(5 / 4))
    return steps + 1 if R >= 3 else steps


class ErrorBranch(Enum):
    SQRT_EXP = "sqrt-exponential"
    POLYLOG = "polylog"
    LOGLOG_SQUARED = "loglog-squared"


@dataclass
class ErrorFactor:
    """ℰ_n(Q) or Ẽ_n(Q) with user-supplied constants"""
    branch: ErrorBranch
    c1: float = field(default_factory=lambda: config.error_factor_c1)
    c2: float = field(default_factory=lambda: config.error_factor_c2)

    def evaluate(self, Q: float) -> float:
        log4q = math.log(4 * Q)
        if self.branch is ErrorBranch.SQRT_EXP:
            return math.exp(self.c1 * math.sqrt(log4q))
        if self.branch is ErrorBranch.POLYLOG:
            return log4q ** self.c2
        return math.exp(self.c2 * math.log(log4q) ** 2)


def error_factor_kind(n: int, R: int, c1: Optional[float] = None,
                      c2: Optional[float] = None) -> ErrorFactor:
    _check_dims(n, R)
    if n == 2 and R == 1:
        branch = ErrorBranch.SQRT_EXP
    elif n >= 3 and R == 1:
        branch = ErrorBranch.POLYLOG
    elif n >= 3:
        branch = ErrorBranch.LOGLOG_SQUARED
    else:
        raise UnspecifiedBranch(f"no error factor is given for n={n}, R={R}")
    return ErrorFactor(branch, c1 if c1 is not None else config.error_factor_c1,
                       c2 if c2 is not None else config.error_factor_c2)


def tilde_error_factor_kind(n: int, c1: Optional[float] = None,
                            c2: Optional[float] = None) -> ErrorFactor:
    """Ẽ_n: sqrt-exponential in the plane, polylogarithmic from n = 3 on"""
    if n < 2:
        raise ParameterError(f"n={n} must be at least 2")
    branch = ErrorBranch.SQRT_EXP if n == 2 else ErrorBranch.POLYLOG
    return ErrorFactor(branch, c1 if c1 is not None else config.error_factor_c1,
                       c2 if c2 is not None else config.error_factor_c2)


@dataclass
class ExponentReport:
    n: int
    R: int
    theta: Fraction
    beta_st: Fraction
    alpha_st: Fraction
    beta_sequence: List[Fraction]
    steps_to_converge: int
    delta_threshold_exponent: Fraction
    error_factor_kind: Optional[ErrorBranch]
    radon_hurwitz: int
    landing: Optional[Fraction] = None

    def get_status(self) -> Dict[str, object]:
        return {
            "n": self.n,
            "R": self.R,
            "theta": str(self.theta),
            "beta_st": str(self.beta_st),
            "alpha_st": str(self.alpha_st),
            "beta_sequence": [str(b) for b in self.beta_sequence],
            "steps_to_converge": self.steps_to_converge,
            "delta_threshold_exponent": str(self.delta_threshold_exponent),
            "error_factor_kind": self.error_factor_kind.value if self.error_factor_kind else "unspecified",
            "radon_hurwitz": self.radon_hurwitz,
            "final_composition": str(self.landing) if self.landing is not None else None,
            "theta_float": float(self.theta),
        }


def exponent_report(n: int, R: int, max_steps: int = 64) -> ExponentReport:
    sequence = beta_sequence(n, R, max_steps)
    try:
        branch: Optional[ErrorBranch] = error_factor_kind(n, R).branch
    except UnspecifiedBranch:
        branch = None
    return ExponentReport(
        n=n, R=R,
        theta=theta(n, R),
        beta_st=beta_stop(n, R),
        alpha_st=alpha_stop(n, R),
        beta_sequence=sequence.values,
        steps_to_converge=sequence.steps_to_converge,
        delta_threshold_exponent=delta_range_exponent(n, R),
        error_factor_kind=branch,
        radon_hurwitz=radon_hurwitz(n),
        landing=sequence.landing,
    )


def exponent_table(nmax: int) -> str:
    """Markdown table of Θ, β_st, α_st over 2 ≤ n ≤ nmax, 1 ≤ R ≤ RH(n)"""
    lines = ["| n | R | RH(n) | Θ | β_st | α_st |", "|---|---|---|---|---|---|"]
    for n in range(2, nmax + 1):
        rh = radon_hurwitz(n)
        for R in range(1, rh + 1):
            lines.append(f"| {n} | {R} | {rh} | {theta(n, R)} | {beta_stop(n, R)} | {alpha_stop(n, R)} |")
    return "\n".join(lines)
