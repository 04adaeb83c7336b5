"""
Exact Polynomials - rational-coefficient polynomials with exact and floating evaluation
"""

import math
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Sequence, Tuple

import numpy as np

Exponent = Tuple[int, ...]


class ExactPolynomial:
    """Multivariate polynomial Σ c_e x^e with Fraction coefficients"""

    def __init__(self, n: int, terms: Dict[Exponent, Fraction]):
        self.n = n
        cleaned: Dict[Exponent, Fraction] = {}
        for exponent, coefficient in terms.items():
            exponent = tuple(int(e) for e in exponent)
            if len(exponent) != n or any(e < 0 for e in exponent):
                raise ValueError(f"exponent {exponent} does not fit dimension {n}")
            coefficient = Fraction(coefficient)
            if coefficient != 0:
                cleaned[exponent] = cleaned.get(exponent, Fraction(0)) + coefficient
        self.terms = {e: c for e, c in sorted(cleaned.items()) if c != 0}

    def __repr__(self) -> str:
        return f"ExactPolynomial(n={self.n}, terms={self.terms})"

    def __eq__(self, other) -> bool:
        return isinstance(other, ExactPolynomial) and self.n == other.n and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.n, tuple(self.terms.items())))

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def scale(self, factor: Fraction) -> "ExactPolynomial":
        return ExactPolynomial(self.n, {e: c * factor for e, c in self.terms.items()})

    def __add__(self, other: "ExactPolynomial") -> "ExactPolynomial":
        merged = dict(self.terms)
        for e, c in other.terms.items():
            merged[e] = merged.get(e, Fraction(0)) + c
        return ExactPolynomial(self.n, merged)

    def derivative(self, i: int) -> "ExactPolynomial":
        """∂/∂x_i (0-based axis)"""
        terms = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                continue
            lowered = list(e)
            lowered[i] -= 1
            terms[tuple(lowered)] = c * e[i]
        return ExactPolynomial(self.n, terms)

    @cached_property
    def gradient_polys(self) -> List["ExactPolynomial"]:
        return [self.derivative(i) for i in range(self.n)]

    @cached_property
    def hessian_polys(self) -> List[List["ExactPolynomial"]]:
        return [[g.derivative(k) for k in range(self.n)] for g in self.gradient_polys]

    # exact evaluation

    def value_exact(self, x: Sequence[Fraction]) -> Fraction:
        total = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for xi, ei in zip(x, e):
                if ei:
                    term *= Fraction(xi) ** ei
            total += term
        return total

    # floating evaluation, vectorized over rows of X

    def values(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.zeros(X.shape[0])
        for e, c in self.terms.items():
            term = np.full(X.shape[0], float(c))
            for i, ei in enumerate(e):
                if ei:
                    term = term * X[:, i] ** ei
            out += term
        return out

    def gradients(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.stack([g.values(X) for g in self.gradient_polys], axis=-1)

    def hessians(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        rows = [np.stack([h.values(X) for h in row], axis=-1) for row in self.hessian_polys]
        return np.stack(rows, axis=-2)

    # integrality of q·f(a/q)

    @cached_property
    def common_denominator(self) -> int:
        return math.lcm(*(c.denominator for c in self.terms.values())) if self.terms else 1

    def scaled_numerators(self, A: np.ndarray, q: int) -> Tuple[np.ndarray, int]:
        """Integers N with q·f(A/q) = N / D for D returned alongside.

        Works in int64 when a magnitude bound certifies there is no overflow and
        falls back to Python integers otherwise; never touches floating point.
        """
        A = np.atleast_2d(np.asarray(A, dtype=np.int64))
        d = max(self.degree, 1)
        L = self.common_denominator
        denominator = L * q ** (d - 1)

        a_max = int(np.max(np.abs(A))) if A.size else 0
        bound = 0
        for e, c in self.terms.items():
            k = sum(e)
            bound += abs(c.numerator * (L // c.denominator)) * max(a_max, 1) ** k * q ** (d - k)
        dtype = np.int64 if bound < 2 ** 62 else object
        work = A.astype(dtype)

        total = np.zeros(A.shape[0], dtype=dtype)
        for e, c in self.terms.items():
            k = sum(e)
            integer_coefficient = c.numerator * (L // c.denominator) * q ** (d - k)
            term = np.full(A.shape[0], integer_coefficient, dtype=dtype)
            for i, ei in enumerate(e):
                if ei:
                    term = term * work[:, i] ** ei
            total = total + term
        return total, denominator


def quadratic_form(coefficients: Dict[Tuple[int, int], Fraction], n: int) -> ExactPolynomial:
    """Polynomial Σ c_{ik} x_i x_k from a (i, k) -> coefficient map"""
    terms: Dict[Exponent, Fraction] = {}
    for (i, k), c in coefficients.items():
        e = [0] * n
        e[i] += 1
        e[k] += 1
        terms[tuple(e)] = terms.get(tuple(e), Fraction(0)) + Fraction(c)
    return ExactPolynomial(n, terms)
