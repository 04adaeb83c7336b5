"""
Counting Engines - exact lattice enumeration of rational points near a manifold

Primal counts iterate q and then a over the integer box q·domain; the dual
count iterates pencils j and then a over j_s·𝔏. Every outer index yields an
exactly rounded partial and partials are merged with math.fsum, so results
do not depend on how the outer index is sharded over worker processes.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from multiprocessing import Pool
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from counting.index_sets import dyadic_pencils, standard_pencils
from counting.weights import Ball, DeltaVector, WeightFunction
from geometry.legendre import DualFamily, gradient_envelope
from geometry.manifold import ManifoldSpec, check_curvature
from utils.config import config
from utils.errors import CapacityError, InversionError, ParameterError, UnsupportedError
from utils.helpers import (
    Stopwatch, box_chunks, box_size, exact_sum, integer_box, interval_box,
    nearest_int_distance, nearest_int_distance_exact,
)

logger = logging.getLogger(__name__)

SHARP = "sharp"
SMOOTHED = "smoothed"
BASE = "base"
ON_MANIFOLD = "on-manifold"
DUAL = "dual"


@dataclass
class CountResult:
    """One evaluated counting function"""
    value: Union[int, float]
    Q: int
    delta: Optional[Union[DeltaVector, float]]
    main_term: float
    elapsed: float
    enumerated: int
    kind: str

    @property
    def ratio(self) -> float:
        return self.value / self.main_term if self.main_term else math.nan

    def get_status(self) -> Dict[str, object]:
        if isinstance(self.delta, DeltaVector):
            delta = list(self.delta.deltas)
        else:
            delta = self.delta
        return {
            "kind": self.kind,
            "Q": self.Q,
            "delta": delta,
            "value": self.value,
            "main_term": self.main_term,
            "ratio": self.ratio,
            "enumerated": self.enumerated,
            "elapsed": self.elapsed,
        }


@dataclass(frozen=True)
class LayerTask:
    """Work for a single denominator q"""
    spec: ManifoldSpec
    ball: Ball
    q: int
    mode: str
    deltas: Tuple[float, ...] = ()
    weight: Optional[WeightFunction] = None


@dataclass(frozen=True)
class PencilTask:
    """Work for a single pencil j of the dual count"""
    spec: ManifoldSpec
    weight: WeightFunction
    s: int
    j: Tuple[int, ...]
    delta_star: float
    lows: Tuple[float, ...]
    highs: Tuple[float, ...]


@lru_cache(maxsize=32)
def _admissible(spec: ManifoldSpec) -> bool:
    report = check_curvature(spec)
    if not report.admissible:
        logger.warning("CountingEngine: manifold is not curvature-admissible on the sample")
    return report.admissible


def _check_capacity(size: int, label: str) -> None:
    if size > config.enumeration_capacity:
        raise CapacityError(f"{label}: box of {size} points exceeds capacity {config.enumeration_capacity}")


def _near_mask(spec: ManifoldSpec, A: np.ndarray, q: int, deltas: Sequence[float]) -> np.ndarray:
    """‖q f_r(a/q)‖ ≤ δ_r for every r; decisions in the hazard band are redone exactly"""
    X = A / q
    keep = np.ones(A.shape[0], dtype=bool)
    for r, delta in enumerate(deltas, start=1):
        distance = nearest_int_distance(q * spec.values(r, X))
        near = distance <= delta
        if spec.exact_polys is not None:
            hazard = np.nonzero(np.abs(distance - delta) < config.hazard_band)[0]
            poly = spec.exact_polys[r - 1]
            bound = Fraction(delta)
            for k in hazard:
                point = [Fraction(int(a), q) for a in A[k]]
                near[k] = nearest_int_distance_exact(q * poly.value_exact(point)) <= bound
        keep &= near
    return keep


def _on_manifold_mask(spec: ManifoldSpec, A: np.ndarray, q: int) -> np.ndarray:
    keep = np.ones(A.shape[0], dtype=bool)
    for poly in spec.exact_polys:
        numerators, denominator = poly.scaled_numerators(A, q)
        keep &= np.asarray(numerators % denominator == 0, dtype=bool)
    return keep


def _dual_near_mask(family: DualFamily, A: np.ndarray, j_s: int, conjugate: np.ndarray,
                    delta_star: float) -> np.ndarray:
    """‖j_s F*(a/j_s)‖ < δ*; for quadratic pencils the hazard band is redone exactly"""
    distance = nearest_int_distance(j_s * conjugate)
    near = distance < delta_star
    if family.has_exact_conjugate:
        bound = Fraction(delta_star)
        for k in np.nonzero(np.abs(distance - delta_star) < config.hazard_band)[0]:
            value = family.conjugate_exact([Fraction(int(a), j_s) for a in A[k]])
            near[k] = nearest_int_distance_exact(j_s * value) < bound
    return near


def _primal_layer(task: LayerTask) -> Tuple[float, float, int]:
    """(value, base, enumerated) for one q.

    value is the sharp/on-manifold integer count or the weighted sum; base is
    the number of box points (sharp) or Σ w (weighted) with no width condition.
    """
    lows, highs = integer_box(task.ball.center, task.ball.radius, task.q)
    size = box_size(lows, highs)
    _check_capacity(size, f"q={task.q}")

    counted = 0
    weighted: List[float] = []
    base: List[float] = []
    for A in box_chunks(lows, highs):
        if task.mode == ON_MANIFOLD:
            counted += int(np.count_nonzero(_on_manifold_mask(task.spec, A, task.q)))
            continue
        if task.mode == SHARP:
            counted += int(np.count_nonzero(_near_mask(task.spec, A, task.q, task.deltas)))
            continue

        w = task.weight(A / task.q)
        live = w > 0
        base.append(exact_sum(w[live].tolist()))
        if task.mode == SMOOTHED and live.any():
            near = _near_mask(task.spec, A[live], task.q, task.deltas)
            weighted.append(exact_sum(w[live][near].tolist()))

    if task.mode in (SHARP, ON_MANIFOLD):
        return float(counted), float(size), size
    base_value = exact_sum(base)
    value = exact_sum(weighted) if task.mode == SMOOTHED else base_value
    return value, base_value, size


def _pencil_layer(task: PencilTask) -> Tuple[float, int]:
    """(Σ_a w*/√|det H_F|, enumerated) for one pencil j"""
    family = DualFamily(task.spec, task.s, task.j, weight=task.weight)
    j_s = task.j[task.s - 1]
    lows, highs = interval_box(task.lows, task.highs, j_s)
    size = box_size(lows, highs)
    _check_capacity(size, f"j={task.j}")

    partials: List[float] = []
    support = task.weight.support
    for A in box_chunks(lows, highs):
        Y = A / j_s
        weights, X, converged = family.dual_weight_batch(Y)
        failed = ~converged
        if failed.any() and support.contains(X[failed]).any():
            raise InversionError(
                f"CountingEngine: gradient inversion failed inside supp w for pencil j={task.j}"
            )
        live = weights > 0
        if not live.any():
            continue
        Yl, Xl, wl = Y[live], X[live], weights[live]
        conjugate = np.sum(Yl * Xl, axis=-1) - family.F.values(Xl)
        near = _dual_near_mask(family, A[live], j_s, conjugate, task.delta_star)
        if near.any():
            dets = np.abs(np.linalg.det(family.F.hessians(Xl[near])))
            partials.append(exact_sum((wl[near] / np.sqrt(dets)).tolist()))
    return exact_sum(partials), size


def _run(worker: Callable, tasks: Sequence, shards: int) -> List:
    """Apply worker to tasks in order, over contiguous blocks when shards > 1"""
    if shards <= 1 or len(tasks) <= 1:
        return [worker(task) for task in tasks]
    chunk = math.ceil(len(tasks) / shards)
    with Pool(processes=shards) as pool:
        return pool.map(worker, tasks, chunksize=chunk)


def _check_Q(Q: int) -> None:
    if Q < 1:
        raise ParameterError(f"Q={Q} must be at least 1")


def _check_delta(spec: ManifoldSpec, delta: DeltaVector) -> None:
    if delta.R != spec.R:
        raise ParameterError(f"width vector has {delta.R} entries, manifold has R={spec.R}")


def _check_weight(spec: ManifoldSpec, w: WeightFunction) -> None:
    if w.n != spec.n:
        raise ParameterError(f"weight lives in dimension {w.n}, manifold in {spec.n}")
    if not w.fits_inside(spec.x0, spec.eps0):
        logger.warning("CountingEngine: supp w is not inside the parametrisation ball B̄_eps0(x0)")


def count_sharp(spec: ManifoldSpec, domain: Ball, Q: int, delta: DeltaVector,
                shards: int = 1) -> CountResult:
    """#{(a, q): 1 ≤ q ≤ Q, a/q ∈ domain, ‖q f_r(a/q)‖ ≤ δ_r for all r}.

    main_term is Π(2δ_r) times the number of pairs with a/q in the domain.
    """
    _check_Q(Q)
    _check_delta(spec, delta)
    _admissible(spec)
    timer = Stopwatch()
    tasks = [LayerTask(spec, domain, q, SHARP, delta.deltas) for q in range(1, Q + 1)]
    layers = _run(_primal_layer, tasks, shards)
    value = int(sum(int(v) for v, _, _ in layers))
    total = int(sum(int(b) for _, b, _ in layers))
    main_term = float(math.prod(2 * d for d in delta.exact) * total)
    logger.info("CountingEngine: sharp count Q=%d finished, %d of %d points", Q, value, total)
    return CountResult(value, Q, delta, main_term, timer.elapsed(),
                       sum(e for _, _, e in layers), SHARP)


def count_smoothed(spec: ManifoldSpec, w: WeightFunction, Q: int, delta: DeltaVector,
                   shards: int = 1) -> CountResult:
    """Σ w(a/q) over qualifying (a, q); main_term = Π(2δ_r)·𝔑₀(Q)"""
    _check_Q(Q)
    _check_delta(spec, delta)
    _check_weight(spec, w)
    _admissible(spec)
    timer = Stopwatch()
    tasks = [LayerTask(spec, w.support, q, SMOOTHED, delta.deltas, w) for q in range(1, Q + 1)]
    layers = _run(_primal_layer, tasks, shards)
    value = exact_sum(v for v, _, _ in layers)
    base = exact_sum(b for _, b, _ in layers)
    main_term = float(math.prod(2 * d for d in delta.exact)) * base
    logger.info("CountingEngine: smoothed count Q=%d finished, value %.6g", Q, value)
    return CountResult(value, Q, delta, main_term, timer.elapsed(),
                       sum(e for _, _, e in layers), SMOOTHED)


def base_count(spec: ManifoldSpec, w: WeightFunction, Q: int, shards: int = 1,
               q_range: Optional[Tuple[int, int]] = None) -> CountResult:
    """𝔑₀(Q) = Σ_{q≤Q} Σ_a w(a/q); main_term is the Riemann-sum predictor ŵ(0)·Σ qⁿ.

    q_range restricts the outer sum to first..last (inclusive) for shard checks.
    """
    _check_Q(Q)
    _check_weight(spec, w)
    first, last = q_range or (1, Q)
    timer = Stopwatch()
    tasks = [LayerTask(spec, w.support, q, BASE, (), w) for q in range(first, last + 1)]
    layers = _run(_primal_layer, tasks, shards)
    value = exact_sum(v for v, _, _ in layers)
    predictor = w.w_hat_zero * float(sum(q ** spec.n for q in range(first, last + 1)))
    return CountResult(value, Q, None, predictor, timer.elapsed(),
                       sum(e for _, _, e in layers), BASE)


def count_on_manifold(spec: ManifoldSpec, domain: Ball, Q: int, shards: int = 1) -> CountResult:
    """#{(a, q): a/q ∈ domain, q f_r(a/q) ∈ ℤ for all r}, decided in integer arithmetic"""
    _check_Q(Q)
    if spec.exact_polys is None:
        raise UnsupportedError("on-manifold counting needs an exact polynomial representation")
    timer = Stopwatch()
    tasks = [LayerTask(spec, domain, q, ON_MANIFOLD) for q in range(1, Q + 1)]
    layers = _run(_primal_layer, tasks, shards)
    value = int(sum(int(v) for v, _, _ in layers))
    logger.info("CountingEngine: on-manifold count Q=%d finished, %d points", Q, value)
    return CountResult(value, Q, 0.0, 0.0, timer.elapsed(),
                       sum(e for _, _, e in layers), ON_MANIFOLD)


def on_manifold_counts(spec: ManifoldSpec, domain: Ball, Q_grid: Sequence[int],
                       shards: int = 1) -> List[int]:
    """N_M(Q, 0) for every Q of a grid from a single pass over q ≤ max Q"""
    if spec.exact_polys is None:
        raise UnsupportedError("on-manifold counting needs an exact polynomial representation")
    if not Q_grid:
        return []
    top = max(Q_grid)
    _check_Q(min(Q_grid))
    tasks = [LayerTask(spec, domain, q, ON_MANIFOLD) for q in range(1, top + 1)]
    per_q = [int(v) for v, _, _ in _run(_primal_layer, tasks, shards)]
    prefix = np.cumsum([0] + per_q)
    return [int(prefix[Q]) for Q in Q_grid]


def dual_pencils(spec: ManifoldSpec, s: int, Qstar: int, dyadic: bool = False) -> List[Tuple[int, ...]]:
    """𝒥^s(Q*) or, for the dyadic variant, the union of 𝒥_ℓ with 2^(ℓ-1) ≤ Q*"""
    if not dyadic:
        return list(standard_pencils(s, Qstar, spec.R))
    if s != 1:
        raise ParameterError("the dyadic dual count is organised by the first coordinate")
    levels = Qstar.bit_length()
    return [j for level in range(1, levels + 1) for j in dyadic_pencils(level, spec.R)]


def count_dual(spec: ManifoldSpec, w: WeightFunction, s: int, Qstar: int, delta_star: float,
               shards: int = 1, dyadic: bool = False) -> CountResult:
    """Σ_j Σ_a w*(a/j_s)/√|det H_F((∇F)⁻¹(a/j_s))| over ‖j_s F*(a/j_s)‖ < δ*"""
    _check_Q(Qstar)
    spec.check_index(s)
    if not 0 < delta_star < 0.5:
        raise ParameterError(f"delta_star={delta_star} must lie in (0, 1/2)")
    _check_weight(spec, w)
    _admissible(spec)
    timer = Stopwatch()

    ratio_range = (0.0, 2.0) if dyadic else (0.0, 1.0)
    lows, highs = gradient_envelope(spec, w, s, ratio_range)
    tasks = [PencilTask(spec, w, s, j, float(delta_star), tuple(lows.tolist()), tuple(highs.tolist()))
             for j in dual_pencils(spec, s, Qstar, dyadic)]
    layers = _run(_pencil_layer, tasks, shards)
    value = exact_sum(v for v, _ in layers)
    logger.info("CountingEngine: dual count Q*=%d over %d pencils, value %.6g", Qstar, len(tasks), value)
    return CountResult(value, Qstar, float(delta_star), 0.0, timer.elapsed(),
                       sum(e for _, e in layers), DUAL)


def main_term_predictor(spec: ManifoldSpec, w: WeightFunction, Q: int, delta: DeltaVector,
                        shards: int = 1) -> float:
    """Π_r(2δ_r)·𝔑₀(Q)"""
    _check_delta(spec, delta)
    base = base_count(spec, w, Q, shards)
    return float(math.prod(2 * d for d in delta.exact)) * base.value


def enumeration_size(ball: Ball, Q: int) -> int:
    """Lattice points a primal count over this ball would visit"""
    total = 0
    for q in range(1, Q + 1):
        lows, highs = integer_box(ball.center, ball.radius, q)
        total += box_size(lows, highs)
    return total
