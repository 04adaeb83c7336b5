"""
Sweeps - batch evaluation of counting functions over a Q grid with δ_r = c_r·Q^(-γ_r),
written to a resumable CSV
"""

import csv
import logging
import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from rich.progress import Progress

from counting import lattice
from counting.index_sets import standard_pencils
from counting.weights import Ball, DeltaVector, WeightFunction, standard_weight
from exponents.calculus import delta_range_exponent
from geometry.manifold import ManifoldSpec
from utils.config import config, load_manifold_config, manifold_from_dict, weight_from_dict
from utils.errors import CapacityError, DataError, ParameterError
from utils.helpers import Stopwatch

logger = logging.getLogger(__name__)

KINDS = (lattice.SHARP, lattice.SMOOTHED, lattice.DUAL, lattice.ON_MANIFOLD)


@dataclass
class SweepPlan:
    """A Q grid, a width law and the counter to run at every grid point"""
    spec: ManifoldSpec
    Q_grid: List[int]
    c: Tuple[float, ...]
    gamma: Tuple[float, ...]
    kind: str = lattice.SMOOTHED
    shards: int = 1
    out: Optional[Path] = None
    manifold_ref: str = "inline"
    weight: Optional[WeightFunction] = None
    domain: Optional[Ball] = None
    dual_s: int = 1
    big: bool = False
    validate_range: bool = False
    margin: float = 0.0
    record_elapsed: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown counter kind {self.kind!r}, expected one of {KINDS}")
        expected = 1 if self.kind == lattice.DUAL else self.spec.R
        if len(self.c) != expected or len(self.gamma) != expected:
            raise ParameterError(f"width law needs {expected} constants c and exponents γ")
        if self.weight is None:
            self.weight = standard_weight(self.spec)
        if self.domain is None:
            self.domain = Ball(self.spec.x0, self.spec.eps0)

    @property
    def width_count(self) -> int:
        return len(self.c)

    def deltas_at(self, Q: int) -> Tuple[float, ...]:
        deltas = tuple(c * Q ** (-g) for c, g in zip(self.c, self.gamma))
        for d in deltas:
            if not 0 < d < 0.5:
                raise ParameterError(f"width {d} at Q={Q} leaves (0, 1/2)")
        return deltas

    def validate(self) -> None:
        for Q in self.Q_grid:
            if Q < 1:
                raise ParameterError(f"grid value Q={Q} must be positive")
            if self.kind != lattice.ON_MANIFOLD:
                self.deltas_at(Q)
        if self.validate_range:
            threshold = -float(delta_range_exponent(self.spec.n, self.spec.R)) - self.margin
            for g in self.gamma:
                if not g < threshold:
                    raise ParameterError(
                        f"exponent γ={g} is outside the admissible range γ < {threshold:.6g}"
                    )

    def estimated_points(self, Q: int) -> int:
        if self.kind == lattice.DUAL:
            pencils = len(standard_pencils(self.dual_s, Q, self.spec.R))
            side = 2 * math.ceil(Q * (1 + 4 * self.spec.eps0)) + 1
            return pencils * side ** self.spec.n
        ball = self.weight.support if self.kind == lattice.SMOOTHED else self.domain
        return lattice.enumeration_size(ball, Q)

    def header(self) -> List[str]:
        deltas = [f"delta_{r}" for r in range(1, self.width_count + 1)]
        return ["Q"] + deltas + ["kind", "value", "main_term", "ratio", "enumerated", "elapsed_ms"]


@dataclass
class SweepOutcome:
    rows: List[Dict[str, str]] = field(default_factory=list)
    computed: List[int] = field(default_factory=list)
    skipped: List[int] = field(default_factory=list)


def _format(value: Union[int, float]) -> str:
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def _existing_rows(path: Path, header: List[str]) -> List[Dict[str, str]]:
    if not path.exists() or path.stat().st_size == 0:
        return []
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != header:
            raise DataError(f"{path} has columns {reader.fieldnames}, expected {header}")
        return list(reader)


def _evaluate(plan: SweepPlan, Q: int) -> lattice.CountResult:
    if plan.kind == lattice.ON_MANIFOLD:
        return lattice.count_on_manifold(plan.spec, plan.domain, Q, plan.shards)
    deltas = plan.deltas_at(Q)
    if plan.kind == lattice.DUAL:
        return lattice.count_dual(plan.spec, plan.weight, plan.dual_s, Q, deltas[0], plan.shards)
    delta = DeltaVector(deltas)
    if plan.kind == lattice.SHARP:
        return lattice.count_sharp(plan.spec, plan.domain, Q, delta, plan.shards)
    return lattice.count_smoothed(plan.spec, plan.weight, Q, delta, plan.shards)


def _row(plan: SweepPlan, Q: int, result: lattice.CountResult, elapsed_ms: int) -> Dict[str, str]:
    row = {"Q": str(Q)}
    deltas = plan.deltas_at(Q) if plan.kind != lattice.ON_MANIFOLD else (0.0,) * plan.width_count
    for r, d in enumerate(deltas, start=1):
        row[f"delta_{r}"] = _format(d)
    row.update({
        "kind": plan.kind,
        "value": _format(result.value),
        "main_term": _format(result.main_term),
        "ratio": _format(result.ratio),
        "enumerated": str(result.enumerated),
        "elapsed_ms": str(elapsed_ms if plan.record_elapsed else 0),
    })
    return row


def run_sweep(plan: SweepPlan, out: Optional[Union[str, Path]] = None,
              show_progress: bool = True) -> SweepOutcome:
    """One CSV row per grid point; rows already present in the file are kept and skipped"""
    plan.validate()
    path = Path(out or plan.out or "results.csv")
    header = plan.header()
    existing = _existing_rows(path, header)
    done = {int(row["Q"]) for row in existing}
    outcome = SweepOutcome(rows=list(existing))

    if not existing:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as handle:
            csv.DictWriter(handle, fieldnames=header, lineterminator="\n").writeheader()

    pending = [Q for Q in plan.Q_grid if Q not in done]
    if not pending:
        logger.info("Sweep: %s already holds every grid point", path)
        return outcome

    with Progress(disable=not show_progress, transient=True) as progress:
        task = progress.add_task(f"sweep {plan.kind}", total=len(pending))
        for Q in pending:
            try:
                estimate = plan.estimated_points(Q)
                if estimate > config.sweep_budget and not plan.big:
                    raise CapacityError(
                        f"Q={Q} would visit about {estimate} points, above the budget {config.sweep_budget}"
                    )
                timer = Stopwatch()
                result = _evaluate(plan, Q)
                row = _row(plan, Q, result, timer.elapsed_ms())
            except CapacityError as exc:
                logger.warning("Sweep: skipping Q=%d (%s)", Q, exc)
                outcome.skipped.append(Q)
                progress.advance(task)
                continue
            with open(path, "a", newline="") as handle:
                csv.DictWriter(handle, fieldnames=header, lineterminator="\n").writerow(row)
            outcome.rows.append(row)
            outcome.computed.append(Q)
            progress.advance(task)
    logger.info("Sweep: %d rows computed, %d skipped, output %s",
                len(outcome.computed), len(outcome.skipped), path)
    return outcome


def load_sweep_plan(path: Union[str, Path]) -> SweepPlan:
    """Read a plan from TOML: a [manifold] table (or manifold = "file.toml") and a [sweep] table"""
    path = Path(path)
    with open(path, "rb") as handle:
        data = tomllib.load(handle)

    reference = data.get("manifold")
    if isinstance(reference, str):
        spec, weight = load_manifold_config(path.parent / reference)
        manifold_ref = reference
    elif isinstance(reference, dict):
        spec, weight = manifold_from_dict(reference), weight_from_dict(reference)
        manifold_ref = "inline"
    else:
        raise ParameterError(f"{path}: a manifold table or file reference is required")

    sweep = data.get("sweep", {})
    out = sweep.get("out")
    return SweepPlan(
        spec=spec,
        Q_grid=[int(q) for q in sweep.get("Q", [])],
        c=tuple(float(v) for v in sweep.get("c", [])),
        gamma=tuple(float(Fraction(str(v))) for v in sweep.get("gamma", [])),
        kind=sweep.get("kind", lattice.SMOOTHED),
        shards=int(sweep.get("shards", config.default_shards)),
        out=Path(out) if out else None,
        manifold_ref=manifold_ref,
        weight=weight,
        dual_s=int(sweep.get("s", 1)),
        big=bool(sweep.get("big", False)),
        validate_range=bool(sweep.get("validate_range", False)),
        margin=float(sweep.get("margin", 0.0)),
        record_elapsed=bool(sweep.get("record_elapsed", False)),
    )
