"""
Pencil Index Sets - standard, big and dyadic sets of frequency vectors j
"""

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence, Tuple

from utils.errors import ParameterError


class PencilKind(Enum):
    STANDARD = "standard"
    BIG = "big"
    DYADIC = "dyadic"


@dataclass(frozen=True)
class PencilSet:
    """Index set of pencils j ∈ ℤ^R dominated by coordinate s (1-based).

    standard 𝒥^s(X):  j ≥ 0, 0 < |j|_∞ = j_s ≤ X
    big 𝒥^s_b(X):     j ∈ ℤ^R, 0 < |j|_∞ ≤ 2 j_s ≤ 2X
    dyadic 𝒥_ℓ:       2^(ℓ-1) ≤ j_1 < 2^ℓ, 0 ≤ j_r ≤ 2^ℓ for r ≠ 1 (X plays the role of ℓ)
    """
    s: int
    X: int
    kind: PencilKind
    R: int

    def __post_init__(self):
        if not 1 <= self.s <= self.R:
            raise IndexError(f"pencil direction s={self.s} outside 1..{self.R}")
        if self.X < 0:
            raise ParameterError(f"pencil bound X={self.X} must be nonnegative")
        if self.kind is PencilKind.DYADIC and self.s != 1:
            raise ParameterError("dyadic pencil sets are indexed by the first coordinate")

    def contains(self, j: Sequence[int]) -> bool:
        j = tuple(int(v) for v in j)
        if len(j) != self.R:
            return False
        j_s = j[self.s - 1]
        top = max(abs(v) for v in j)
        if self.kind is PencilKind.STANDARD:
            return min(j) >= 0 and 0 < top == j_s <= self.X
        if self.kind is PencilKind.BIG:
            return 0 < top <= 2 * j_s <= 2 * self.X
        level = self.X
        others = j[1:]
        return (2 ** (level - 1) <= j[0] < 2 ** level
                and all(0 <= v <= 2 ** level for v in others))

    def __iter__(self) -> Iterator[Tuple[int, ...]]:
        """Lexicographic order in (j_s, remaining coordinates)"""
        if self.kind is PencilKind.DYADIC:
            level = self.X
            if level < 1:
                return
            for j1 in range(2 ** (level - 1), 2 ** level):
                for rest in itertools.product(range(2 ** level + 1), repeat=self.R - 1):
                    yield (j1,) + rest
            return

        for j_s in range(1, self.X + 1):
            if self.kind is PencilKind.STANDARD:
                axis = range(0, j_s + 1)
            else:
                axis = range(-2 * j_s, 2 * j_s + 1)
            for rest in itertools.product(axis, repeat=self.R - 1):
                j = rest[: self.s - 1] + (j_s,) + rest[self.s - 1:]
                if self.contains(j):
                    yield j

    def __len__(self) -> int:
        return sum(1 for _ in self)


def standard_pencils(s: int, X: int, R: int) -> PencilSet:
    return PencilSet(s=s, X=X, kind=PencilKind.STANDARD, R=R)


def big_pencils(s: int, X: int, R: int) -> PencilSet:
    return PencilSet(s=s, X=X, kind=PencilKind.BIG, R=R)


def dyadic_pencils(level: int, R: int) -> PencilSet:
    return PencilSet(s=1, X=level, kind=PencilKind.DYADIC, R=R)


def dominant_directions(j: Sequence[int]) -> Tuple[int, ...]:
    """All s (1-based) with j ∈ 𝒥^s(|j|_∞) for a nonnegative nonzero j"""
    top = max(j)
    return tuple(s + 1 for s, v in enumerate(j) if v == top and top > 0)
