"""
Command-line interface - argparse subcommands over every engine, JSON on stdout
"""

import argparse
import csv
import logging
import sys
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np
from rich.console import Console

from counting import lattice
from counting.weights import Ball, DeltaVector, WeightFunction, WeightProfile, standard_weight
from exponents import calculus
from exponents.diophantine import (
    ApproximationProfile, hausdorff_dimension, khintchine_series_converges,
)
from geometry import manifold
from geometry.legendre import (
    DualFamily, gradient_inversion_residual, inverse_hessian_residual, involution_residual,
)
from harmonic import oscint, trig
from simulations.fitting import fit_exponent, read_rows
from simulations.sweep import load_sweep_plan, run_sweep
from utils.config import config, load_manifold_config
from utils.errors import ExplorerError, ParameterError
from utils.helpers import setup_logging

logger = logging.getLogger(__name__)
console = Console()


def _floats(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> List[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _rationals(text: str) -> List[Fraction]:
    return [Fraction(v.strip()) for v in text.split(",") if v.strip()]


def _add_manifold_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--manifold", help="manifold TOML file")
    parser.add_argument("--family", choices=config.get_families()[:3], default="paraboloid",
                        help="built-in family when no file is given")
    parser.add_argument("--n", type=int, default=2, help="dimension for the paraboloid")
    parser.add_argument("--c", type=_rationals, help="diag-quadric coefficients, e.g. 2,1")
    parser.add_argument("--x0", type=_floats, help="center, e.g. 0,0")
    parser.add_argument("--eps0", type=float, default=0.25, help="parametrisation radius")


def _load_manifold(args: argparse.Namespace):
    """(spec, weight) from --manifold or the built-in family flags"""
    if args.manifold:
        spec, weight = load_manifold_config(args.manifold)
        return spec, weight or standard_weight(spec)
    if args.family == "paraboloid":
        spec = manifold.paraboloid(args.n, x0=args.x0, eps0=args.eps0)
    elif args.family == "diag-quadric":
        if not args.c:
            raise ParameterError("diag-quadric needs --c")
        spec = manifold.diag_quadric(args.c, x0=args.x0, eps0=args.eps0)
    else:
        spec = manifold.complex_squaring(x0=args.x0, eps0=args.eps0)
    return spec, standard_weight(spec)


def _emit(data: Dict) -> None:
    console.print_json(data=data)


# handlers

def cmd_curvature(args: argparse.Namespace) -> int:
    spec, _ = _load_manifold(args)
    report = manifold.check_curvature(spec, args.t_samples, args.x_samples)
    status = report.get_status()
    status["radon_hurwitz"] = manifold.radon_hurwitz(spec.n)
    _emit(status)
    return 0


def cmd_count(args: argparse.Namespace) -> int:
    spec, weight = _load_manifold(args)
    shards = args.shards or config.default_shards
    if not manifold.check_curvature(spec).admissible and not args.force:
        raise ParameterError("manifold fails the sampled curvature check; pass --force to count anyway")
    domain = Ball(spec.x0, spec.eps0)

    if args.on_manifold:
        result = lattice.count_on_manifold(spec, domain, args.Q, shards)
    elif args.base:
        result = lattice.base_count(spec, weight, args.Q, shards)
    elif args.dual is not None:
        delta_star = args.delta[0] if args.delta else 0.1
        result = lattice.count_dual(spec, weight, args.dual, args.Q, delta_star, shards, args.dyadic)
    else:
        deltas = args.delta or [0.1]
        if len(deltas) == 1:
            deltas = deltas * spec.R
        delta = DeltaVector(tuple(deltas))
        if args.sharp:
            result = lattice.count_sharp(spec, domain, args.Q, delta, shards)
        else:
            result = lattice.count_smoothed(spec, weight, args.Q, delta, shards)
    _emit(result.get_status())
    return 0


def cmd_selberg(args: argparse.Namespace) -> int:
    minus, plus = trig.selberg_pair(args.alpha, args.beta, args.J)
    theta = np.arange(args.grid) / args.grid
    lower, upper = trig.evaluate(minus, theta), trig.evaluate(plus, theta)
    target = trig.indicator(args.alpha, args.beta, theta)
    distance = np.minimum(np.abs(np.mod(theta - args.alpha + 0.5, 1.0) - 0.5),
                          np.abs(np.mod(theta - args.beta + 0.5, 1.0) - 0.5))
    away = distance > 1e-6
    sandwich = bool(np.all(lower[away] <= target[away] + 1e-10) and np.all(target[away] <= upper[away] + 1e-10))
    bound = all(
        abs(p.coefficient(j)) <= trig.selberg_coefficient_bound(p, j) + 1e-12
        for p in (minus, plus) for j in range(1, args.J + 1)
    )
    _emit({
        "minus": minus.get_status(),
        "plus": plus.get_status(),
        "properties": {
            "sandwich": sandwich,
            "mean_minus": minus.exact_mean(),
            "mean_plus": plus.exact_mean(),
            "coefficient_bound": bound,
        },
    })
    return 0


def cmd_dual(args: argparse.Namespace) -> int:
    spec, weight = _load_manifold(args)
    family = DualFamily(spec, args.s, args.j, weight=weight)
    report: Dict[str, object] = {"family": family.get_status()}
    if args.check_involution:
        report["involution_residual"] = involution_residual(family, args.samples)
        report["inverse_hessian_residual"] = inverse_hessian_residual(family, args.samples)
        report["gradient_inversion_residual"] = gradient_inversion_residual(family, args.samples)
    _emit(report)
    return 0


def _bench_family(args: argparse.Namespace) -> List[oscint.OscIntegral]:
    d = args.d
    radius = args.radius if args.radius else (1.0 if d == 1 else 0.25)
    amplitude = WeightFunction(center=(0.0,) * d, radius=radius, profile=WeightProfile(args.profile))
    bounds = oscint.ball_bounds(amplitude.support)
    if args.phase == "paraboloid":
        phase, critical = oscint.QuadraticPhase(np.eye(d)), (0.0,) * d
    elif args.phase == "saddle":
        signs = [1.0 if i % 2 == 0 else -1.0 for i in range(d)]
        phase, critical = oscint.QuadraticPhase(np.diag(signs)), (0.0,) * d
    else:
        linear = np.zeros(d)
        linear[0] = 1.0
        phase, critical = oscint.QuadraticPhase(np.zeros((d, d)), linear), None
    return [oscint.OscIntegral(d, phase, amplitude, lam, bounds, critical) for lam in args.lambda_grid]


def cmd_oscint(args: argparse.Namespace) -> int:
    kind = oscint.DecayKind(args.kind)
    integrals = _bench_family(args)
    if kind is oscint.DecayKind.STATIONARY and integrals[0].critical_point is None:
        raise ParameterError("the linear phase has no critical point; use --kind nonstationary")
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["lambda", "abs_I", "abs_prediction", "residual"])
    for integral in integrals:
        value = oscint.evaluate(integral).value
        prediction = (oscint.stationary_phase_prediction(integral)
                      if kind is oscint.DecayKind.STATIONARY else 0j)
        writer.writerow([repr(integral.lam), repr(abs(value)), repr(abs(prediction)),
                         repr(abs(value - prediction))])
    if len(integrals) >= 5:
        fit = oscint.decay_slope(kind, integrals)
        logger.info("oscint: fitted %s slope %.4f", kind.value, fit.slope)
    return 0


def cmd_exponents(args: argparse.Namespace) -> int:
    if args.table:
        console.print(calculus.exponent_table(args.table), markup=False)
        return 0
    report = calculus.exponent_report(args.n, args.R, args.steps).get_status()
    if args.tau:
        profile = ApproximationProfile.of(args.tau)
        report["hausdorff_dimension"] = str(hausdorff_dimension(args.n, args.R, profile))
        if args.s is not None:
            report["series"] = khintchine_series_converges(args.n, args.R, profile, args.s).value
    _emit(report)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    plan = load_sweep_plan(args.plan)
    if args.big:
        plan.big = True
    if args.shards:
        plan.shards = args.shards
    outcome = run_sweep(plan, args.out, show_progress=not args.no_progress)
    _emit({"computed": outcome.computed, "skipped": outcome.skipped, "rows": len(outcome.rows)})
    return 0


def cmd_fit(args: argparse.Namespace) -> int:
    rows = read_rows(args.input)
    result = fit_exponent(rows, args.n, args.gamma, args.model, args.tolerance)
    _emit(result.get_status())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rational-points",
        description="Rational points near manifolds: counting engines, duality and exponent calculus",
    )
    parser.add_argument("--log-level", default="INFO")
    parser.add_argument("--config", metavar="TOML", help="override numeric defaults from a [config] table")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curvature", help="sampled curvature-condition report")
    _add_manifold_options(p)
    p.add_argument("--t-samples", type=int, help="defaults to config.curvature_t_samples")
    p.add_argument("--x-samples", type=int, help="defaults to config.curvature_x_samples")
    p.set_defaults(handler=cmd_curvature)

    p = sub.add_parser("count", help="evaluate a counting function")
    _add_manifold_options(p)
    p.add_argument("--Q", type=int, required=True)
    p.add_argument("--delta", type=_floats, help="widths δ_r, comma separated (δ* for --dual)")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--sharp", action="store_true")
    mode.add_argument("--smoothed", action="store_true")
    mode.add_argument("--dual", type=int, metavar="S", help="dual count dominated by codimension S")
    mode.add_argument("--on-manifold", action="store_true")
    mode.add_argument("--base", action="store_true")
    p.add_argument("--dyadic", action="store_true", help="dyadic pencil sets for --dual")
    p.add_argument("--shards", type=int, help="defaults to config.default_shards")
    p.add_argument("--force", action="store_true", help="count even when the curvature check fails")
    p.set_defaults(handler=cmd_count)

    p = sub.add_parser("selberg", help="Selberg pair coefficients and property report")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--J", type=int, required=True)
    p.add_argument("--grid", type=int, default=4096)
    p.set_defaults(handler=cmd_selberg)

    p = sub.add_parser("dual", help="Legendre dual family identities")
    _add_manifold_options(p)
    p.add_argument("--s", type=int, default=1)
    p.add_argument("--j", type=_ints, required=True)
    p.add_argument("--check-involution", action="store_true")
    p.add_argument("--samples", type=int, default=100)
    p.set_defaults(handler=cmd_dual)

    p = sub.add_parser("oscint", help="oscillatory integral bench, CSV on stdout")
    p.add_argument("--phase", choices=["paraboloid", "saddle", "linear"], default="paraboloid")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--lambda-grid", type=_floats, default=[25.0, 50.0, 100.0, 200.0, 400.0])
    p.add_argument("--kind", choices=[k.value for k in oscint.DecayKind], default="stationary")
    p.add_argument("--radius", type=float)
    p.add_argument("--profile", choices=[p.value for p in WeightProfile], default="standard_bump")
    p.set_defaults(handler=cmd_oscint)

    p = sub.add_parser("exponents", help="exact exponent report")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--R", type=int, default=1)
    p.add_argument("--steps", type=int, default=64)
    p.add_argument("--tau", type=_rationals)
    p.add_argument("--s", type=Fraction)
    p.add_argument("--table", type=int, metavar="NMAX")
    p.set_defaults(handler=cmd_exponents)

    p = sub.add_parser("sweep", help="run a sweep plan into a resumable CSV")
    p.add_argument("--plan", required=True)
    p.add_argument("--out")
    p.add_argument("--shards", type=int)
    p.add_argument("--big", action="store_true", help="allow rows above the enumeration budget")
    p.add_argument("--no-progress", action="store_true")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("fit", help="log-log slope fit of sweep results")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--model", choices=["count_vs_Q"], default="count_vs_Q")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--gamma", type=_floats, default=[0.0])
    p.add_argument("--tolerance", type=float)
    p.set_defaults(handler=cmd_fit)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)
    try:
        if args.config:
            config.load_toml(args.config)
            logger.info("cli: settings loaded from %s", args.config)
        return args.handler(args)
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted[/yellow]")
        return 130
    except ExplorerError as exc:
        console.print(f"[red]Error: {exc}[/red]")
        return 2
