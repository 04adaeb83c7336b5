"""Configuration management for the Rational Points Explorer"""

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from utils.errors import ParameterError


class Config:
    """Numerical defaults shared by every engine"""

    def __init__(self):
        # Legendre inversion
        self.inv_tol = 1e-10
        self.newton_max_iter = 100
        self.newton_max_halvings = 40

        # Manifold checks
        self.exact_agreement_tol = 1e-12
        self.exact_agreement_samples = 100
        self.curvature_zero_tol = 1e-12
        self.curvature_t_samples = 64
        self.curvature_x_samples = 256

        # Counting
        self.hazard_band = 1e-9
        self.enumeration_capacity = 2 ** 63
        self.default_shards = 1

        # Quadrature
        self.quadrature_tol = 1e-9
        self.quadrature_node_cap = 2 ** 20
        self.quadrature_panel_order = 16
        self.weight_quadrature_rel_tol = 1e-8
        self.noise_floor = 1e-14

        # Experiments
        self.sweep_budget = 200_000_000
        self.asymptotic_slope_tol = 0.15
        self.upper_bound_slope_tol = 0.2
        self.min_fit_points = 4

        # Error factor constants c1, c2 (never stated explicitly)
        self.error_factor_c1 = 1.0
        self.error_factor_c2 = 1.0

    def load_toml(self, path: Union[str, Path]) -> "Config":
        """Override attributes in place from the [config] table of a TOML file"""
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
        overrides = data.get("config", {})
        unknown = sorted(key for key in overrides if not hasattr(self, key))
        if unknown:
            raise ParameterError(f"Config: unknown setting(s) {', '.join(unknown)}")
        for key, value in overrides.items():
            setattr(self, key, value)
        return self

    @classmethod
    def from_toml(cls, path: Union[str, Path]) -> "Config":
        """Fresh defaults overridden from a TOML file; the shared config is untouched"""
        return cls().load_toml(path)

    def get_families(self) -> List[str]:
        """Names accepted by the manifold loader"""
        return ["paraboloid", "diag-quadric", "complex-squaring", "polynomial"]


config = Config()


def parse_rational(value: Any) -> Fraction:
    """Accept ints, floats (exact binary value) and 'p/q' strings"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, float)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise ParameterError(f"Config: cannot read {value!r} as a rational")


def _read_polynomials(raw: List[Any]) -> List[Dict[Tuple[int, ...], Fraction]]:
    polys = []
    for codim_terms in raw:
        terms: Dict[Tuple[int, ...], Fraction] = {}
        for entry in codim_terms:
            if len(entry) != 3:
                raise ParameterError(
                    "Config: polynomial terms are [exponent-tuple, numerator, denominator]"
                )
            exponents, numerator, denominator = entry
            key = tuple(int(e) for e in exponents)
            terms[key] = terms.get(key, Fraction(0)) + Fraction(int(numerator), int(denominator))
        polys.append(terms)
    return polys


def load_manifold_config(path: Union[str, Path]):
    """Build a ManifoldSpec (and optional WeightFunction) from a TOML file.

    Returns (spec, weight) where weight is None unless a [weight] table is given.
    """
    with open(path, "rb") as handle:
        data = tomllib.load(handle)
    return manifold_from_dict(data), weight_from_dict(data)


def manifold_from_dict(data: Dict[str, Any]):
    from geometry import manifold

    family = data.get("family")
    if family not in config.get_families():
        raise ParameterError(f"Config: unknown family {family!r}")
    x0 = tuple(float(v) for v in data.get("x0", []))
    eps0 = float(data.get("eps0", 0.0))
    n = int(data.get("n", len(x0)))

    if family == "paraboloid":
        return manifold.paraboloid(n, x0=x0 or None, eps0=eps0)
    if family == "diag-quadric":
        coefficients = [parse_rational(c) for c in data.get("c", [])]
        return manifold.diag_quadric(coefficients, x0=x0 or None, eps0=eps0)
    if family == "complex-squaring":
        return manifold.complex_squaring(x0=x0 or None, eps0=eps0)
    polys = _read_polynomials(data.get("coefficients", []))
    R = int(data.get("R", len(polys)))
    if R != len(polys):
        raise ParameterError(f"Config: R={R} but {len(polys)} polynomials given")
    return manifold.user_polynomial(n, polys, x0=x0 or None, eps0=eps0)


def weight_from_dict(data: Dict[str, Any]):
    from counting.weights import WeightFunction

    table: Optional[Dict[str, Any]] = data.get("weight")
    if table is None:
        return None
    return WeightFunction(
        center=tuple(float(v) for v in table["center"]),
        radius=float(table["radius"]),
        profile=table.get("profile", "standard_bump"),
    )
