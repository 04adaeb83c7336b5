"""Shared fixtures and brute-force reference enumerators"""

import itertools
import math
from fractions import Fraction
from typing import Callable, List, Optional, Sequence

import numpy as np
import pytest

from counting.weights import Ball, WeightFunction, standard_weight
from geometry import manifold
from utils.config import config

# q·f_r(a/q) for each codimension, as exact rationals
ScaledValues = Callable[[Sequence[int], int], List[Fraction]]


def paraboloid_values(a: Sequence[int], q: int) -> List[Fraction]:
    return [Fraction(sum(v * v for v in a), 2 * q)]


def complex_squaring_values(a: Sequence[int], q: int) -> List[Fraction]:
    a1, a2 = a
    return [Fraction(a1 * a1 - a2 * a2, 2 * q), Fraction(a1 * a2, q)]


def paraboloid_pencil(j: Sequence[int]) -> List[List[Fraction]]:
    return [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]


def complex_squaring_pencil(j: Sequence[int]) -> List[List[Fraction]]:
    # F = (x₁² - x₂²)/2 + t·x₁x₂ with t = j₂/j₁
    t = Fraction(j[1], j[0])
    return [[Fraction(1), t], [t, Fraction(-1)]]


def distance(t: Fraction) -> Fraction:
    return min(t - math.floor(t), math.ceil(t) - t)


class NaiveCounter:
    """Deliberately plain loops over q and every a with a/q in a sup-norm ball.

    pencil(j) gives the Hessian of the s = 1 pencil when it is a homogeneous
    quadratic F = ½xᵀHx; the dual sum then uses F* = ½yᵀH⁻¹y in exact arithmetic.
    """

    def __init__(self, values: ScaledValues, pencil: Optional[Callable] = None):
        self.values = values
        self.pencil = pencil
        self.R = len(values((0, 0), 1))

    @staticmethod
    def points(ball: Ball, q: int):
        center = [Fraction(c) for c in ball.center]
        radius = Fraction(ball.radius)
        axes = [range(math.floor(q * (c - radius)) - 1, math.ceil(q * (c + radius)) + 2) for c in center]
        for a in itertools.product(*axes):
            if all(abs(Fraction(v, q) - c) <= radius for v, c in zip(a, center)):
                yield a

    def sharp(self, ball: Ball, Q: int, deltas: Sequence[float]) -> int:
        bounds = [Fraction(d) for d in deltas]
        count = 0
        for q in range(1, Q + 1):
            for a in self.points(ball, q):
                if all(distance(t) <= d for t, d in zip(self.values(a, q), bounds)):
                    count += 1
        return count

    def smoothed(self, w: WeightFunction, Q: int, deltas: Sequence[float]) -> float:
        bounds = [Fraction(d) for d in deltas]
        total = 0.0
        for q in range(1, Q + 1):
            for a in self.points(w.support, q):
                if all(distance(t) <= d for t, d in zip(self.values(a, q), bounds)):
                    total += float(w(np.array([a], dtype=float) / q)[0])
        return total

    def on_manifold(self, ball: Ball, Q: int) -> int:
        return sum(
            1
            for q in range(1, Q + 1)
            for a in self.points(ball, q)
            if all(t.denominator == 1 for t in self.values(a, q))
        )

    def base(self, w: WeightFunction, Q: int) -> float:
        return math.fsum(
            float(w(np.array([a], dtype=float) / q)[0])
            for q in range(1, Q + 1)
            for a in self.points(w.support, q)
        )

    def dual(self, w: WeightFunction, Qstar: int, delta_star: float) -> float:
        bound = Fraction(delta_star)
        center = [Fraction(c) for c in w.center]
        radius = Fraction(w.radius)
        terms = []
        for j1 in range(1, Qstar + 1):
            for rest in itertools.product(range(j1 + 1), repeat=self.R - 1):
                (h11, h12), (h21, h22) = self.pencil((j1,) + rest)
                det = h11 * h22 - h12 * h21
                # |y|_∞ ≤ (row sum of |H|)·|x|_∞ for x in supp w
                reach = max(abs(h11) + abs(h12), abs(h21) + abs(h22)) * (max(abs(c) for c in center) + radius)
                axis = range(math.floor(-reach * j1) - 1, math.ceil(reach * j1) + 2)
                for a in itertools.product(axis, repeat=2):
                    y1, y2 = Fraction(a[0], j1), Fraction(a[1], j1)
                    x = ((h22 * y1 - h12 * y2) / det, (h11 * y2 - h21 * y1) / det)
                    if any(abs(xi - c) > radius for xi, c in zip(x, center)):
                        continue
                    weight = float(w(np.array([[float(x[0]), float(x[1])]]))[0])
                    if weight == 0:
                        continue
                    conjugate = (y1 * x[0] + y2 * x[1]) / 2
                    if distance(j1 * conjugate) < bound:
                        terms.append(weight / math.sqrt(abs(float(det))))
        return math.fsum(terms)


@pytest.fixture
def paraboloid2():
    return manifold.paraboloid(2, eps0=0.4)


@pytest.fixture
def complex_sq():
    return manifold.complex_squaring(eps0=0.4)


@pytest.fixture
def paraboloid_oracle():
    return NaiveCounter(paraboloid_values, paraboloid_pencil)


@pytest.fixture
def complex_oracle():
    return NaiveCounter(complex_squaring_values, complex_squaring_pencil)


@pytest.fixture
def weight_for():
    return standard_weight


@pytest.fixture
def restore_config():
    """Snapshot the shared Config and put it back after the test"""
    saved = dict(vars(config))
    yield config
    for key, value in saved.items():
        setattr(config, key, value)
