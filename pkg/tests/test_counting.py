import itertools

import numpy as np
import pytest

from counting import lattice
from counting.index_sets import (
    big_pencils, dominant_directions, dyadic_pencils, standard_pencils,
)
from counting.weights import Ball, DeltaVector, WeightFunction, WeightProfile, standard_weight
from geometry import manifold
from geometry.manifold import ManifoldFamily, ManifoldSpec
from utils.config import config
from utils.errors import CapacityError, ParameterError, UnsupportedError


def _draws(R, count=20, seed=11):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield DeltaVector(tuple(rng.uniform(0.01, 0.49, size=R)))


# widths and weights

def test_delta_vector_products():
    delta = DeltaVector((0.25, 0.125))
    assert delta.delta_prod == 0.03125
    assert delta.delta_prod_r(1) == 0.125
    assert delta.delta_prod_r(2) == 0.25
    assert delta.selberg_degrees == (2, 4)
    with pytest.raises(IndexError):
        delta.delta_prod_r(3)


def test_delta_vector_rejects_bad_widths():
    for bad in [(), (0.5,), (0.0,), (-0.1, 0.2)]:
        with pytest.raises(ParameterError):
            DeltaVector(bad)


def test_weight_function_values_and_integral():
    w = WeightFunction((0.0, 0.0), 0.5, WeightProfile.COSINE_TAPER)
    assert w(np.array([[0.0, 0.0]]))[0] == 1.0
    assert w(np.array([[0.5, 0.0], [0.7, 0.1]])).tolist() == [0.0, 0.0]
    assert w.w_hat_zero == pytest.approx((0.5 * 0.625) ** 2, rel=1e-12)
    assert w.fits_inside((0.0, 0.0), 0.5)
    assert not w.fits_inside((0.1, 0.0), 0.5)


def test_ball_membership_is_sup_norm():
    ball = Ball((0.0, 0.0), 0.25)
    assert ball.contains(np.array([[0.25, -0.25], [0.26, 0.0]])).tolist() == [True, False]
    with pytest.raises(ParameterError):
        Ball((0.0,), 0.0)


# pencil index sets

def test_standard_pencils_partition_nonnegative_vectors():
    X, R = 5, 3
    sets = [standard_pencils(s, X, R) for s in range(1, R + 1)]
    for j in itertools.product(range(X + 1), repeat=R):
        if max(j) == 0:
            continue
        members = tuple(s for s, pencils in enumerate(sets, start=1) if pencils.contains(j))
        assert members == dominant_directions(j)


def test_big_pencils_contain_standard_ones():
    for s in (1, 2):
        big = big_pencils(s, 4, 2)
        assert all(big.contains(j) for j in standard_pencils(s, 4, 2))
        assert big.contains((-7, 4) if s == 2 else (4, -7))
        assert not big.contains((0, 0))


def test_pencil_set_sizes():
    assert len(standard_pencils(1, 3, 1)) == 3
    assert len(standard_pencils(1, 2, 2)) == 5
    assert len(dyadic_pencils(1, 2)) == 3
    assert list(dyadic_pencils(1, 2)) == [(1, 0), (1, 1), (1, 2)]
    with pytest.raises(IndexError):
        standard_pencils(3, 2, 2)


# primal counts against brute force

def test_sharp_count_matches_brute_force(paraboloid2, paraboloid_oracle):
    domain = Ball(paraboloid2.x0, paraboloid2.eps0)
    for Q, delta in zip(itertools.cycle((4, 9, 16)), _draws(1)):
        result = lattice.count_sharp(paraboloid2, domain, Q, delta)
        assert result.value == paraboloid_oracle.sharp(domain, Q, delta.deltas)


def test_sharp_count_complex_squaring_matches_brute_force(complex_sq, complex_oracle):
    domain = Ball(complex_sq.x0, 0.3)
    for Q, delta in zip(itertools.cycle((5, 12, 16)), _draws(2)):
        result = lattice.count_sharp(complex_sq, domain, Q, delta)
        assert result.value == complex_oracle.sharp(domain, Q, delta.deltas)


def test_smoothed_count_matches_brute_force(complex_sq, complex_oracle, weight_for):
    w = weight_for(complex_sq)
    for Q, delta in zip(itertools.cycle((3, 8, 13)), _draws(2, seed=5)):
        result = lattice.count_smoothed(complex_sq, w, Q, delta)
        assert result.value == pytest.approx(complex_oracle.smoothed(w, Q, delta.deltas), rel=1e-12, abs=1e-12)


def test_on_manifold_count_matches_brute_force(paraboloid2, paraboloid_oracle):
    domain = Ball((0.0, 0.0), 1.0)
    assert lattice.count_on_manifold(paraboloid2, domain, 4).value == paraboloid_oracle.on_manifold(domain, 4)
    grid = [1, 3, 6, 8]
    counts = lattice.on_manifold_counts(paraboloid2, domain, grid)
    assert counts == [paraboloid_oracle.on_manifold(domain, Q) for Q in grid]
    assert lattice.on_manifold_counts(paraboloid2, domain, []) == []


def test_on_manifold_count_complex_squaring(complex_sq, complex_oracle):
    domain = Ball((0.0, 0.0), 0.4)
    for Q in (2, 7, 10):
        assert lattice.count_on_manifold(complex_sq, domain, Q).value == complex_oracle.on_manifold(domain, Q)


def test_base_count_matches_brute_force(paraboloid2, paraboloid_oracle, complex_sq, complex_oracle, weight_for):
    for spec, oracle in ((paraboloid2, paraboloid_oracle), (complex_sq, complex_oracle)):
        w = weight_for(spec)
        for Q in (1, 6, 11, 16):
            assert lattice.base_count(spec, w, Q).value == pytest.approx(oracle.base(w, Q), rel=1e-12, abs=1e-12)


def test_on_manifold_requires_exact_polynomials():
    spec = ManifoldSpec(n=2, R=1, x0=(0.0, 0.0), eps0=0.25, family=ManifoldFamily.PARABOLOID)
    with pytest.raises(UnsupportedError):
        lattice.count_on_manifold(spec, Ball((0.0, 0.0), 0.25), 3)


def test_sharp_main_term(paraboloid2):
    domain = Ball((0.0, 0.0), 0.3)
    result = lattice.count_sharp(paraboloid2, domain, 10, DeltaVector((0.25,)))
    assert result.main_term == 0.5 * lattice.enumeration_size(domain, 10)
    assert result.enumerated == lattice.enumeration_size(domain, 10)
    assert result.kind == lattice.SHARP


def test_sharp_count_is_monotone_in_width(complex_sq):
    domain = Ball((0.0, 0.0), 0.25)
    narrow = lattice.count_sharp(complex_sq, domain, 12, DeltaVector((0.1, 0.1))).value
    wide = lattice.count_sharp(complex_sq, domain, 12, DeltaVector((0.2, 0.1))).value
    assert narrow <= wide


def test_invalid_arguments(paraboloid2, weight_for):
    w = weight_for(paraboloid2)
    with pytest.raises(ParameterError):
        lattice.count_smoothed(paraboloid2, w, 0, DeltaVector((0.1,)))
    with pytest.raises(ParameterError):
        lattice.count_smoothed(paraboloid2, w, 4, DeltaVector((0.1, 0.1)))
    with pytest.raises(ParameterError):
        lattice.count_smoothed(paraboloid2, WeightFunction((0.0,), 0.2), 4, DeltaVector((0.1,)))
    with pytest.raises(ParameterError):
        lattice.count_dual(paraboloid2, w, 1, 3, 0.5)


def test_capacity_limit(paraboloid2, monkeypatch):
    monkeypatch.setattr(config, "enumeration_capacity", 10)
    with pytest.raises(CapacityError):
        lattice.count_sharp(paraboloid2, Ball((0.0, 0.0), 0.4), 8, DeltaVector((0.1,)))


# base count and predictors

def test_base_count_shards_are_additive(paraboloid2, weight_for):
    w = weight_for(paraboloid2)
    full = lattice.base_count(paraboloid2, w, 10).value
    head = lattice.base_count(paraboloid2, w, 10, q_range=(1, 4)).value
    tail = lattice.base_count(paraboloid2, w, 10, q_range=(5, 10)).value
    assert head + tail == pytest.approx(full, rel=1e-12)


def test_main_term_predictor_scales_with_widths(complex_sq, weight_for):
    w = weight_for(complex_sq)
    base = lattice.base_count(complex_sq, w, 8).value
    quarter = lattice.main_term_predictor(complex_sq, w, 8, DeltaVector((0.25, 0.25)))
    assert quarter == pytest.approx(0.25 * base, rel=1e-14)
    doubled = lattice.main_term_predictor(complex_sq, w, 8, DeltaVector((0.2, 0.1)))
    single = lattice.main_term_predictor(complex_sq, w, 8, DeltaVector((0.1, 0.1)))
    assert doubled == pytest.approx(2 * single, rel=1e-14)


def test_base_count_follows_riemann_predictor():
    spec = manifold.paraboloid(2, x0=(0.5, 0.5), eps0=0.25)
    result = lattice.base_count(spec, standard_weight(spec), 64)
    assert abs(result.ratio - 1.0) <= 0.1


# determinism

def test_results_do_not_depend_on_sharding(complex_sq, weight_for):
    w = weight_for(complex_sq)
    delta = DeltaVector((0.125, 0.25))
    values = [lattice.count_smoothed(complex_sq, w, 12, delta, shards=k).value for k in (1, 2, 3)]
    assert values[0] == values[1] == values[2]
    sharp = [lattice.count_sharp(complex_sq, Ball((0.0, 0.0), 0.3), 12, delta, shards=k).value
             for k in (1, 3)]
    assert sharp[0] == sharp[1]
    dual = [lattice.count_dual(complex_sq, w, 1, 4, 0.125, shards=k).value for k in (1, 2)]
    assert dual[0] == dual[1]


# dual count

def test_dual_count_single_pencil():
    spec = manifold.paraboloid(2)
    result = lattice.count_dual(spec, standard_weight(spec), 1, 1, 0.1)
    assert result.value == 1.0
    assert result.kind == lattice.DUAL


def test_paraboloid_dual_count_is_the_primal_count():
    # F* = F for the paraboloid, so the dual sum repeats the smoothed primal sum
    spec = manifold.paraboloid(2)
    w = standard_weight(spec)
    dual = lattice.count_dual(spec, w, 1, 8, 0.1).value
    primal = lattice.count_smoothed(spec, w, 8, DeltaVector((0.1,))).value
    assert dual == pytest.approx(primal, rel=1e-12)


@pytest.mark.parametrize("Qstar, delta_star", [(4, 0.25), (6, 0.2), (8, 0.125), (10, 0.1), (12, 0.3)])
def test_dual_count_matches_brute_force(complex_oracle, Qstar, delta_star):
    # off-center so that many j_s·F*(a/j_s) land exactly on δ*
    spec = manifold.complex_squaring(x0=(0.1, 0.05), eps0=0.25)
    w = standard_weight(spec)
    expected = complex_oracle.dual(w, Qstar, delta_star)
    result = lattice.count_dual(spec, w, 1, Qstar, delta_star)
    assert result.value == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_paraboloid_dual_count_matches_brute_force(paraboloid2, paraboloid_oracle, weight_for):
    w = weight_for(paraboloid2)
    for Qstar, delta_star in ((5, 0.25), (9, 0.1), (16, 0.2)):
        expected = paraboloid_oracle.dual(w, Qstar, delta_star)
        assert lattice.count_dual(paraboloid2, w, 1, Qstar, delta_star).value == pytest.approx(
            expected, rel=1e-12, abs=1e-12)


def test_dual_count_settles_exact_ties():
    # j = (5, 5), a = (2, 0): 5·F*(2/5, 0) = 1/5 exactly, below the binary value of 0.2
    spec = manifold.complex_squaring(x0=(0.1, 0.05), eps0=0.25)
    w = standard_weight(spec)
    lower = lattice.count_dual(spec, w, 1, 6, 0.2).value
    upper = lattice.count_dual(spec, w, 1, 6, 0.2 + 1e-6).value
    assert lower == pytest.approx(upper, rel=1e-12)


def test_dual_count_is_monotone_in_Qstar():
    spec = manifold.complex_squaring()
    w = standard_weight(spec)
    values = [lattice.count_dual(spec, w, 1, Qstar, 0.125).value for Qstar in (1, 2, 4)]
    assert values == sorted(values)
    assert values[0] > 0


def test_dyadic_dual_pencils():
    spec = manifold.complex_squaring()
    assert lattice.dual_pencils(spec, 1, 3, dyadic=True) == list(dyadic_pencils(1, 2)) + list(dyadic_pencils(2, 2))
    with pytest.raises(ParameterError):
        lattice.dual_pencils(spec, 2, 3, dyadic=True)


# asymptotics

@pytest.mark.slow
def test_smoothed_count_approaches_main_term():
    spec = manifold.paraboloid(2)
    w = standard_weight(spec)
    delta = DeltaVector((0.1,))
    ratios = {Q: lattice.count_smoothed(spec, w, Q, delta, shards=8).ratio for Q in (64, 128, 256, 512)}
    for Q in (128, 256, 512):
        assert 0.75 <= ratios[Q] <= 1.25, ratios
    assert abs(ratios[512] - 1) < abs(ratios[64] - 1), ratios


@pytest.mark.slow
def test_counts_are_identical_for_one_two_and_eight_shards(complex_sq, paraboloid2, weight_for):
    w = weight_for(complex_sq)
    delta = DeltaVector((0.1, 0.2))
    domain = Ball(complex_sq.x0, 0.3)
    runs = {
        "smoothed": lambda k: lattice.count_smoothed(complex_sq, w, 16, delta, shards=k).value,
        "sharp": lambda k: lattice.count_sharp(complex_sq, domain, 16, delta, shards=k).value,
        "on-manifold": lambda k: lattice.on_manifold_counts(complex_sq, domain, [4, 8, 16], shards=k),
        "base": lambda k: lattice.base_count(complex_sq, w, 16, shards=k).value,
        "dual": lambda k: lattice.count_dual(complex_sq, w, 1, 10, 0.1, shards=k).value,
        "paraboloid dual": lambda k: lattice.count_dual(paraboloid2, weight_for(paraboloid2), 1, 12, 0.2,
                                                        shards=k).value,
    }
    for name, run in runs.items():
        values = [run(k) for k in (1, 2, 8)]
        assert values[0] == values[1] == values[2], name


@pytest.mark.slow
def test_base_count_riemann_predictor_at_large_Q():
    spec = manifold.paraboloid(2, x0=(0.5, 0.5), eps0=0.25)
    result = lattice.base_count(spec, standard_weight(spec), 256)
    assert abs(result.ratio - 1.0) <= 0.05
