"""Helper utilities for the Rational Points Explorer"""

import logging
import math
import time
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np
from rich.console import Console
from rich.logging import RichHandler
from scipy.stats import qmc

ArrayLike = Union[float, np.ndarray]


def setup_logging(level: str = "INFO") -> None:
    """Route every module logger through a single rich handler on stderr"""
    logging.basicConfig(
        level=level.upper(),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), rich_tracebacks=True, show_path=False)],
        force=True,
    )


def nearest_int_distance(t: ArrayLike) -> ArrayLike:
    """‖t‖ = |t - round-half-even(t)|, clamped to [0, 1/2]"""
    distance = np.abs(t - np.rint(t))
    return np.clip(distance, 0.0, 0.5)


def nearest_int_distance_exact(t: Fraction) -> Fraction:
    """Exact ‖t‖ for rationals"""
    floor = t.numerator // t.denominator
    frac = t - floor
    return min(frac, 1 - frac)


def exact_sum(values: Iterable[float]) -> float:
    """Correctly rounded sum; independent of how the values were grouped"""
    return math.fsum(values)


def halton_box(center: Sequence[float], radius: float, count: int,
               include_center: bool = True) -> np.ndarray:
    """Deterministic low-discrepancy points in the sup-norm ball B̄_radius(center)"""
    center = np.asarray(center, dtype=float)
    d = center.shape[0]
    sampler = qmc.Halton(d=d, scramble=False)
    unit = sampler.random(count)
    points = center + radius * (2.0 * unit - 1.0)
    if include_center and count > 0:
        points[0] = center
    return points


def integer_box(center: Sequence[float], radius: float, q: int):
    """Per-axis integer ranges ⌈q(c-r)⌉..⌊q(c+r)⌋ of the box q·B̄_r(c), in exact arithmetic"""
    r = Fraction(radius)
    lows = [math.ceil(q * (Fraction(c) - r)) for c in center]
    highs = [math.floor(q * (Fraction(c) + r)) for c in center]
    return lows, highs


def interval_box(lows: Sequence[float], highs: Sequence[float], q: int):
    """Per-axis integer ranges of q·[low, high]"""
    return ([math.ceil(q * Fraction(v)) for v in lows],
            [math.floor(q * Fraction(v)) for v in highs])


def box_size(lows: Sequence[int], highs: Sequence[int]) -> int:
    size = 1
    for low, high in zip(lows, highs):
        size *= max(0, high - low + 1)
    return size


def box_chunks(lows: Sequence[int], highs: Sequence[int], max_points: int = 1 << 20):
    """Yield the box's integer points in slabs along the first axis"""
    if box_size(lows, highs) == 0:
        return
    slab = max(1, max_points // max(1, box_size(lows[1:], highs[1:])))
    start = lows[0]
    while start <= highs[0]:
        stop = min(highs[0], start + slab - 1)
        yield box_points([start] + list(lows[1:]), [stop] + list(highs[1:]))
        start = stop + 1


def box_points(lows: Sequence[int], highs: Sequence[int]) -> np.ndarray:
    """All integer points of a box as an (N, n) int64 array"""
    axes = [np.arange(low, high + 1, dtype=np.int64) for low, high in zip(lows, highs)]
    if any(axis.size == 0 for axis in axes):
        return np.empty((0, len(axes)), dtype=np.int64)
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


class Stopwatch:
    """Wall-clock timer used for the elapsed fields of results"""

    def __init__(self):
        self.start_time = time.perf_counter()

    def elapsed(self) -> float:
        """Seconds since construction"""
        return time.perf_counter() - self.start_time

    def elapsed_ms(self) -> int:
        return int(round(1000 * self.elapsed()))
