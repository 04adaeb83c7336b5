import itertools
from fractions import Fraction

import numpy as np
import pytest

from counting.index_sets import standard_pencils
from counting.weights import standard_weight
from geometry import manifold
from geometry.legendre import (
    DualFamily, gradient_envelope, gradient_inversion_residual,
    inverse_hessian_residual, involution_residual,
)
from utils.errors import DomainError, InversionError, UnsupportedError
from utils.helpers import halton_box


def _families():
    yield DualFamily(manifold.paraboloid(2), 1, (1,))
    yield DualFamily(manifold.paraboloid(3, x0=(0.1, 0.0, -0.1)), 1, (1,))
    yield DualFamily(manifold.diag_quadric([2, 1]), 1, (3,))
    complex_sq = manifold.complex_squaring()
    for s in (1, 2):
        for j in standard_pencils(s, 8, 2):
            yield DualFamily(complex_sq, s, j)


def test_paraboloid_gradient_inversion_is_identity():
    family = DualFamily(manifold.paraboloid(2), 1, (1,))
    assert np.allclose(family.invert_gradient((0.1, -0.2)), (0.1, -0.2), atol=1e-12)


def test_diag_quadric_inversion():
    family = DualFamily(manifold.diag_quadric([2, 1], eps0=0.5), 1, (1,))
    assert np.allclose(family.invert_gradient((2.0, 1.0)), (1.0, 1.0), atol=1e-10)


def test_complex_squaring_inversion():
    family = DualFamily(manifold.complex_squaring(), 1, (1, 0))
    a, b = 0.1, 0.2
    assert np.allclose(family.invert_gradient((a, -b)), (a, b), atol=1e-12)


def test_inversion_outside_the_domain():
    family = DualFamily(manifold.paraboloid(2, eps0=0.25), 1, (1,))
    with pytest.raises(DomainError):
        family.invert_gradient((0.7, 0.0))
    with pytest.raises(InversionError):
        family.invert_gradient((5.0, 0.0))


def test_conjugates_of_quadratics():
    family = DualFamily(manifold.paraboloid(2), 1, (1,))
    y = np.array([0.2, -0.3])
    assert family.conjugate(y) == pytest.approx(0.5 * y @ y, abs=1e-12)

    family = DualFamily(manifold.diag_quadric([2, 1]), 1, (1,))
    assert family.conjugate(y) == pytest.approx(0.25 * y[0] ** 2 + 0.5 * y[1] ** 2, abs=1e-10)
    assert np.allclose(family.conjugate_hessian(y), np.diag([0.5, 1.0]))
    assert np.allclose(family.conjugate_gradient(y), [0.1, -0.3])


def test_exact_conjugates_of_quadratic_pencils():
    family = DualFamily(manifold.diag_quadric([2, 1], eps0=0.5), 1, (1,))
    assert family.has_exact_conjugate
    assert family.conjugate_exact([2, 1]) == Fraction(3, 2)

    family = DualFamily(manifold.complex_squaring(x0=(0.1, 0.05)), 1, (5, 5))
    assert family.conjugate_exact([Fraction(2, 5), 0]) == Fraction(1, 25)
    assert family.conjugate([0.4, 0.0]) == pytest.approx(0.04, abs=1e-14)

    family = DualFamily(manifold.complex_squaring(), 1, (2, 1))
    for y in ([Fraction(1, 3), Fraction(-1, 7)], [Fraction(1, 5), Fraction(2, 9)]):
        assert float(family.conjugate_exact(y)) == pytest.approx(family.conjugate([float(v) for v in y]), abs=1e-12)


def test_exact_conjugate_needs_a_quadratic_pencil():
    spec = manifold.user_polynomial(2, [{(2, 0): Fraction(1, 2), (0, 2): Fraction(1, 2), (3, 0): Fraction(1, 6)}])
    family = DualFamily(spec, 1, (1,))
    assert not family.has_exact_conjugate
    with pytest.raises(UnsupportedError):
        family.conjugate_exact([Fraction(0), Fraction(0)])


def test_biconjugate_complex_squaring():
    family = DualFamily(manifold.complex_squaring(), 1, (2, 1))
    for x in halton_box((0.0, 0.0), 0.5, 50):
        assert family.biconjugate(x) == pytest.approx(float(family.F.values(x)[0]), abs=1e-8)


def test_dual_weight():
    spec = manifold.paraboloid(2)
    w = standard_weight(spec)
    family = DualFamily(spec, 1, (1,), weight=w)
    assert family.dual_weight((0.05, 0.1)) == pytest.approx(float(w(np.array([[0.05, 0.1]]))[0]))
    assert family.dual_weight((50.0, 0.0)) == 0.0

    spec = manifold.complex_squaring()
    w = standard_weight(spec)
    family = DualFamily(spec, 1, (1, 0), weight=w)
    a, b = 0.1, 0.15
    assert family.dual_weight((a, -b)) == pytest.approx(float(w(np.array([[a, b]]))[0]))


def test_hessian_determinant_at_preimage():
    family = DualFamily(manifold.paraboloid(2), 1, (1,))
    assert family.hessian_det_at_preimage((0.1, 0.1)) == pytest.approx(1.0)

    family = DualFamily(manifold.complex_squaring(), 1, (2, 1))
    y = family.F.gradients(np.array([[0.1, -0.2]]))[0]
    assert family.hessian_det_at_preimage(y) == pytest.approx(1.25)
    assert family.hessian_det_at_preimage(y) == pytest.approx(1.0 / abs(np.linalg.det(family.conjugate_hessian(y))))


def test_conjugate_hessian_against_finite_differences():
    family = DualFamily(manifold.complex_squaring(), 1, (3, 2))
    y = family.F.gradients(np.array([[0.05, 0.1]]))[0]
    h = 1e-4
    numeric = np.zeros((2, 2))
    for i, k in itertools.product(range(2), repeat=2):
        ei, ek = np.eye(2)[i] * h, np.eye(2)[k] * h
        numeric[i, k] = (family.conjugate(y + ei + ek) - family.conjugate(y + ei - ek)
                         - family.conjugate(y - ei + ek) + family.conjugate(y - ei - ek)) / (4 * h * h)
    assert np.allclose(numeric, family.conjugate_hessian(y), atol=1e-5)


def test_duality_identities_for_every_builtin_family():
    for family in _families():
        assert involution_residual(family) <= 1e-8
        assert inverse_hessian_residual(family) <= 1e-6
        assert gradient_inversion_residual(family) <= 1e-9


def test_gradient_envelope_covers_extreme_pencils():
    spec = manifold.complex_squaring()
    w = standard_weight(spec)
    lows, highs = gradient_envelope(spec, w, 1)
    X = halton_box(w.center, w.radius, 200)
    for j in [(1, 0), (1, 1), (4, 3)]:
        Y = DualFamily(spec, 1, j, weight=w).F.gradients(X)
        assert np.all(Y >= lows) and np.all(Y <= highs)
