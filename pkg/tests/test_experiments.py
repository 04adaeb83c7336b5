import pytest

from counting import lattice
from counting.weights import Ball, DeltaVector
from exponents.calculus import theta
from geometry import manifold
from simulations.fitting import dimension_growth_probe, fit_exponent, ratio_stabilization, read_rows
from simulations.sweep import SweepPlan, load_sweep_plan, run_sweep
from utils.config import config
from utils.errors import DataError, ParameterError


def _plan(**overrides):
    settings = dict(spec=manifold.paraboloid(2), Q_grid=[2, 4, 6], c=(0.25,), gamma=(0.0,),
                    kind=lattice.SMOOTHED, record_elapsed=False)
    settings.update(overrides)
    return SweepPlan(**settings)


def _synthetic_rows(power, grid=(8, 16, 32, 64, 128)):
    return [{"Q": str(Q), "value": repr(float(Q) ** power), "ratio": "1.0"} for Q in grid]


# sweeps

def test_sweep_is_resumable(tmp_path):
    out = tmp_path / "sweep.csv"
    first = run_sweep(_plan(), out, show_progress=False)
    assert first.computed == [2, 4, 6]
    content = out.read_bytes()

    second = run_sweep(_plan(), out, show_progress=False)
    assert second.computed == []
    assert len(second.rows) == 3
    assert out.read_bytes() == content


def test_default_sweeps_are_byte_identical(tmp_path):
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    for out in (first, second):
        plan = SweepPlan(spec=manifold.paraboloid(2), Q_grid=[2, 4, 6], c=(0.25,), gamma=(0.0,))
        run_sweep(plan, out, show_progress=False)
    assert first.read_bytes() == second.read_bytes()
    assert all(row["elapsed_ms"] == "0" for row in read_rows(first))

    timed = run_sweep(_plan(record_elapsed=True, Q_grid=[2]), tmp_path / "timed.csv", show_progress=False)
    assert int(timed.rows[0]["elapsed_ms"]) >= 0


def test_sweep_appends_missing_grid_points(tmp_path):
    out = tmp_path / "sweep.csv"
    run_sweep(_plan(Q_grid=[2, 4]), out, show_progress=False)
    outcome = run_sweep(_plan(Q_grid=[2, 4, 6]), out, show_progress=False)
    assert outcome.computed == [6]
    assert [row["Q"] for row in read_rows(out)] == ["2", "4", "6"]


def test_sweep_rows_match_direct_counts(tmp_path):
    out = tmp_path / "sweep.csv"
    plan = _plan(kind=lattice.SHARP, Q_grid=[3, 5])
    run_sweep(plan, out, show_progress=False)
    rows = read_rows(out)
    for row, Q in zip(rows, (3, 5)):
        direct = lattice.count_sharp(plan.spec, plan.domain, Q, DeltaVector(plan.deltas_at(Q)))
        assert int(row["value"]) == direct.value
        assert float(row["delta_1"]) == 0.25
        assert row["kind"] == "sharp"
        assert row["elapsed_ms"] == "0"


def test_empty_grid_writes_only_the_header(tmp_path):
    out = tmp_path / "sweep.csv"
    plan = _plan(Q_grid=[])
    outcome = run_sweep(plan, out, show_progress=False)
    assert outcome.rows == []
    assert out.read_text() == ",".join(plan.header()) + "\n"


def test_sweep_skips_points_over_budget(tmp_path, monkeypatch):
    monkeypatch.setattr(config, "sweep_budget", 10)
    out = tmp_path / "sweep.csv"
    outcome = run_sweep(_plan(Q_grid=[2, 8]), out, show_progress=False)
    assert outcome.computed == [2]
    assert outcome.skipped == [8]
    assert len(read_rows(out)) == 1

    forced = run_sweep(_plan(Q_grid=[2, 8], big=True), out, show_progress=False)
    assert forced.computed == [8]


def test_sweep_output_does_not_depend_on_sharding(tmp_path):
    one, two = tmp_path / "one.csv", tmp_path / "two.csv"
    run_sweep(_plan(shards=1, Q_grid=[4, 8]), one, show_progress=False)
    run_sweep(_plan(shards=2, Q_grid=[4, 8]), two, show_progress=False)
    assert one.read_bytes() == two.read_bytes()


def test_on_manifold_sweep(tmp_path):
    out = tmp_path / "sweep.csv"
    spec = manifold.paraboloid(2, eps0=0.4)
    run_sweep(_plan(spec=spec, kind=lattice.ON_MANIFOLD, Q_grid=[4, 8]), out, show_progress=False)
    rows = read_rows(out)
    domain = Ball(spec.x0, spec.eps0)
    assert [int(r["value"]) for r in rows] == lattice.on_manifold_counts(spec, domain, [4, 8])


def test_sweep_plan_validation(tmp_path):
    with pytest.raises(ParameterError):
        _plan(kind="bogus")
    with pytest.raises(ParameterError):
        _plan(c=(0.25, 0.25))
    with pytest.raises(ParameterError):
        run_sweep(_plan(c=(0.6,)), tmp_path / "a.csv", show_progress=False)
    with pytest.raises(ParameterError):
        run_sweep(_plan(gamma=(1.2,), validate_range=True), tmp_path / "b.csv", show_progress=False)


def test_sweep_refuses_foreign_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    out.write_text("Q,value\n2,1\n")
    with pytest.raises(DataError):
        run_sweep(_plan(), out, show_progress=False)


def test_load_sweep_plan(tmp_path):
    path = tmp_path / "plan.toml"
    path.write_text(
        '[manifold]\nfamily = "complex-squaring"\nx0 = [0.0, 0.0]\neps0 = 0.25\n\n'
        '[sweep]\nQ = [2, 4]\nc = [0.25, 0.25]\ngamma = ["1/2", "1/3"]\nkind = "sharp"\n'
        'record_elapsed = false\nout = "counts.csv"\n'
    )
    plan = load_sweep_plan(path)
    assert plan.spec.R == 2
    assert plan.Q_grid == [2, 4]
    assert plan.gamma == (0.5, 1 / 3)
    assert plan.kind == "sharp"
    assert not plan.record_elapsed
    assert plan.out.name == "counts.csv"


def test_load_sweep_plan_with_manifold_reference(tmp_path):
    (tmp_path / "quadric.toml").write_text('family = "diag-quadric"\nc = ["2", "1"]\nx0 = [0.0, 0.0]\neps0 = 0.25\n')
    path = tmp_path / "plan.toml"
    path.write_text('manifold = "quadric.toml"\n\n[sweep]\nQ = [3]\nc = [0.25]\ngamma = [0]\n')
    plan = load_sweep_plan(path)
    assert plan.manifold_ref == "quadric.toml"
    assert plan.kind == "smoothed"
    assert not plan.record_elapsed

    bare = tmp_path / "bare.toml"
    bare.write_text("[sweep]\nQ = [3]\n")
    with pytest.raises(ParameterError):
        load_sweep_plan(bare)


# fits

def test_fit_recovers_synthetic_power():
    for power in (1.5, 2.5, 13 / 6):
        result = fit_exponent(_synthetic_rows(power), n=2)
        assert result.slope == pytest.approx(power, abs=1e-12)


def test_fit_predictions():
    assert fit_exponent(_synthetic_rows(2.5), n=2, gammas=(0.5,)).passed
    result = fit_exponent(_synthetic_rows(2.0), n=2, gammas=(0.5, 0.5))
    assert result.predicted_slope == 2.0
    assert result.passed
    assert not fit_exponent(_synthetic_rows(3.0), n=2, gammas=(0.5,)).passed


def test_fit_needs_enough_rows():
    with pytest.raises(DataError):
        fit_exponent(_synthetic_rows(2.0, grid=(8, 16, 32)), n=2)
    rows = _synthetic_rows(2.0) + [{"Q": "256", "value": "0", "ratio": "nan"}]
    assert fit_exponent(rows, n=2).points == 5
    with pytest.raises(ParameterError):
        fit_exponent(_synthetic_rows(2.0), n=2, model="ratio_vs_Q")


def test_ratio_stabilization():
    assert ratio_stabilization(_synthetic_rows(1.0)) is None
    ratios = [1.5, 0.6, 1.3, 1.01, 0.99, 1.0]
    rows = [{"Q": str(2 ** k), "value": "1", "ratio": repr(r)} for k, r in enumerate(ratios)]
    assert ratio_stabilization(rows) is True


def test_paraboloid_dimension_growth():
    spec = manifold.paraboloid(2, eps0=0.4)
    result = dimension_growth_probe(spec, [32, 64, 128, 256])
    assert result.predicted_slope == float(theta(2, 1))
    assert result.passed
    assert result.mode == "upper_bound"


# desk-scale acceptance runs

@pytest.mark.slow
def test_paraboloid_sharp_sweep_slope(tmp_path):
    spec = manifold.paraboloid(2, x0=(0.5, 0.5), eps0=0.25)
    plan = SweepPlan(spec=spec, Q_grid=[64, 128, 256, 512], c=(1.0,), gamma=(0.5,), kind=lattice.SHARP)
    outcome = run_sweep(plan, tmp_path / "paraboloid.csv", show_progress=False)
    result = fit_exponent(outcome.rows, n=2, gammas=plan.gamma, tolerance=0.15)
    assert result.passed, result.get_status()


@pytest.mark.slow
def test_complex_squaring_sharp_sweep_slope(tmp_path):
    spec = manifold.complex_squaring(x0=(0.5, 0.5), eps0=0.25)
    plan = SweepPlan(spec=spec, Q_grid=[64, 128, 256, 512], c=(1.0, 1.0), gamma=(0.5, 1 / 3),
                     kind=lattice.SHARP)
    outcome = run_sweep(plan, tmp_path / "complex.csv", show_progress=False)
    result = fit_exponent(outcome.rows, n=2, gammas=plan.gamma, tolerance=0.2)
    assert result.predicted_slope == pytest.approx(13 / 6)
    assert result.passed, result.get_status()

    scaled = [float(row["value"]) / (float(row["delta_1"]) * float(row["delta_2"]) * int(row["Q"]) ** 3)
              for row in outcome.rows]
    assert all(0.15 <= ratio <= 0.75 for ratio in scaled), scaled
    assert max(scaled) / min(scaled) <= 2.0, scaled


@pytest.mark.slow
def test_sweep_bytes_agree_for_one_two_and_eight_shards(tmp_path):
    spec = manifold.complex_squaring(x0=(0.5, 0.5), eps0=0.25)
    outputs = []
    for shards in (1, 2, 8):
        out = tmp_path / f"shards{shards}.csv"
        plan = SweepPlan(spec=spec, Q_grid=[16, 32, 64], c=(1.0, 1.0), gamma=(0.5, 1 / 3), shards=shards)
        run_sweep(plan, out, show_progress=False)
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]


@pytest.mark.slow
def test_complex_squaring_dimension_growth():
    spec = manifold.complex_squaring(eps0=0.4)
    result = dimension_growth_probe(spec, [32, 64, 128, 256, 512])
    assert result.passed, result.get_status()
