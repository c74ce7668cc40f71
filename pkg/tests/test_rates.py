import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isolab import (
    ConfigError,
    DEFAULT_DELTA_GRID,
    DomainError,
    Example23SweepFamily,
    FitError,
    GaussianSweepFamily,
    Metric,
    NeedleSweepFamily,
    PerturbedSweepFamily,
    SweepResult,
    deficit,
    fit_exponent,
    sweep,
    worker_count,
)


# -- grids and fitting --------------------------------------------------------


def test_default_grid_shape():
    assert len(DEFAULT_DELTA_GRID) == 9
    assert DEFAULT_DELTA_GRID[0] == pytest.approx(1e-2)
    assert DEFAULT_DELTA_GRID[-1] == pytest.approx(1e-6)
    ratios = [a / b for a, b in zip(DEFAULT_DELTA_GRID, DEFAULT_DELTA_GRID[1:])]
    assert all(r == pytest.approx(ratios[0], rel=1e-12) for r in ratios)


def test_fit_exponent_exact_on_power_law():
    points = [(d, 3.0 * d**0.7) for d in DEFAULT_DELTA_GRID]
    alpha, c, r2 = fit_exponent(points)
    assert alpha == pytest.approx(0.7, abs=1e-12)
    assert c == pytest.approx(math.log(3.0), abs=1e-10)
    assert r2 == pytest.approx(1.0, abs=1e-12)


def test_fit_exponent_reversal_invariance():
    points = [(d, 2.0 * d**0.31) for d in DEFAULT_DELTA_GRID]
    a1, _, _ = fit_exponent(points)
    a2, _, _ = fit_exponent(list(reversed(points)))
    assert a1 == pytest.approx(a2, abs=1e-14)


def test_fit_exponent_rescale_invariance():
    points = [(d, d**0.5) for d in DEFAULT_DELTA_GRID]
    scaled = [(d, 17.0 * v) for d, v in points]
    a1, c1, _ = fit_exponent(points)
    a2, c2, _ = fit_exponent(scaled)
    assert a2 == pytest.approx(a1, abs=1e-12)
    assert c2 - c1 == pytest.approx(math.log(17.0), abs=1e-10)


def test_fit_exponent_delta_rescale_keeps_exponent():
    points = [(d, d**1.3) for d in DEFAULT_DELTA_GRID]
    moved = [(5.0 * d, v * 5.0**1.3) for d, v in points]
    a1, _, _ = fit_exponent(points)
    a2, _, _ = fit_exponent(moved)
    assert a2 == pytest.approx(a1, abs=1e-12)


@given(
    alpha=st.floats(min_value=0.05, max_value=2.0),
    c=st.floats(min_value=1e-3, max_value=1e3),
)
@settings(max_examples=40)
def test_fit_exponent_recovers_any_power_law(alpha, c):
    points = [(d, c * d**alpha) for d in DEFAULT_DELTA_GRID]
    got, logc, r2 = fit_exponent(points)
    assert got == pytest.approx(alpha, abs=1e-11)
    assert r2 == pytest.approx(1.0, abs=1e-11)


def test_fit_exponent_needs_three_positive_points():
    with pytest.raises(FitError):
        fit_exponent([(1e-2, 1.0), (1e-3, 0.5)])
    with pytest.raises(FitError):
        fit_exponent([(1e-2, 0.0), (1e-3, 0.0), (1e-4, 0.0)])


# -- Metric and SweepResult ---------------------------------------------------


def test_metric_parse_and_label():
    m = Metric.parse("lp:2")
    assert m.kind == "lp" and m.p == 2.0
    assert m.label == "lp(p=2)"
    for name in ("w1", "w2", "entropy", "mixture_l1"):
        assert Metric.parse(name).kind == name


def test_metric_parse_rejects_unknown():
    with pytest.raises(DomainError):
        Metric.parse("hausdorff")
    with pytest.raises(DomainError):
        Metric.parse("lp:0.2")
    with pytest.raises(DomainError):
        Metric.parse("w2:3")


def test_sweep_result_validation_and_dict():
    good = SweepResult(
        points=((1e-2, 0.1), (1e-3, 0.01)),
        fitted_exponent=math.nan,
        fitted_log_constant=math.nan,
        r_squared=math.nan,
        metric_label="lp(p=1)",
        family_name="example23",
    )
    assert not good.fit_available
    d = good.to_dict()
    assert {"alpha", "c", "r_squared", "points", "skipped_deltas"} <= set(d)
    with pytest.raises(DomainError):
        SweepResult(
            points=((1e-3, 0.1), (1e-2, 0.2)),  # increasing deltas
            fitted_exponent=0.5,
            fitted_log_constant=0.0,
            r_squared=1.0,
        )


# -- worker control -----------------------------------------------------------


def test_worker_count_default(monkeypatch):
    monkeypatch.delenv("ISO_LAB_THREADS", raising=False)
    assert worker_count() == 1
    assert worker_count(default=4) == 4


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("ISO_LAB_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("ISO_LAB_THREADS", "0")
    assert worker_count() == 1  # clamped to at least one worker
    monkeypatch.setenv("ISO_LAB_THREADS", "many")
    with pytest.raises(ConfigError):
        worker_count()


# -- families -----------------------------------------------------------------


def test_example23_family_hits_requested_deficit():
    fam = Example23SweepFamily()
    for d in (1e-2, 1e-4):
        m = fam.at_deficit(d, 0.5)
        assert deficit(m, 0.5).deficit == pytest.approx(d, rel=1e-6)


def test_gaussian_family_is_degenerate():
    fam = GaussianSweepFamily()
    m = fam.at_deficit(1e-3, 0.5)  # delta is ignored: the deficit is 0
    assert abs(deficit(m, 0.5).deficit) <= 1e-12


def test_perturbed_family_seeded_deterministic():
    a = PerturbedSweepFamily.seeded(3)
    b = PerturbedSweepFamily.seeded(3)
    assert a.breakpoints == b.breakpoints
    assert a.unit_slopes == b.unit_slopes
    assert PerturbedSweepFamily.seeded(4).breakpoints != a.breakpoints


def test_perturbed_family_solves_deficit():
    fam = PerturbedSweepFamily.seeded(0)
    m = fam.at_deficit(1e-3, 0.5)
    assert deficit(m, 0.5).deficit == pytest.approx(1e-3, rel=5e-2)


# -- sweeps -------------------------------------------------------------------


def test_sweep_lp_orders():
    fam = Example23SweepFamily()
    grid = np.logspace(-2, -5, 7)
    res1 = sweep(fam, 0.5, Metric.parse("lp:1"), grid)
    res2 = sweep(fam, 0.5, Metric.parse("lp:2"), grid)
    assert res1.fitted_exponent == pytest.approx(1.0, abs=0.05)
    assert res2.fitted_exponent == pytest.approx(0.5, abs=0.05)
    assert res1.r_squared > 0.999 and res2.r_squared > 0.999
    assert not res1.skipped and not res2.skipped


def test_sweep_entropy_order_is_linear():
    res = sweep(Example23SweepFamily(), 0.5, Metric.parse("entropy"), np.logspace(-2, -5, 7))
    assert res.fitted_exponent == pytest.approx(1.0, abs=0.05)


def test_sweep_dedupes_and_sorts_grid():
    fam = Example23SweepFamily()
    res = sweep(fam, 0.5, Metric.parse("lp:1"), [1e-3, 1e-2, 1e-3, 1e-4])
    assert [d for d, _ in res.points] == [1e-2, 1e-3, 1e-4]


def test_sweep_rejects_bad_grid():
    fam = Example23SweepFamily()
    with pytest.raises(DomainError):
        sweep(fam, 0.5, Metric.parse("lp:1"), [])
    with pytest.raises(DomainError):
        sweep(fam, 0.5, Metric.parse("lp:1"), [1e-2, -1e-3])


def test_sweep_gaussian_family_yields_no_fit():
    res = sweep(GaussianSweepFamily(), 0.5, Metric.parse("lp:2"), [1e-2, 1e-3, 1e-4])
    assert all(v <= 1e-10 for _, v in res.points)  # zero up to quadrature noise
    assert not res.fit_available  # nothing above the noise floor to fit


def test_sweep_threaded_matches_serial():
    fam = Example23SweepFamily()
    grid = [1e-2, 1e-3, 1e-4, 1e-5]
    serial = sweep(fam, 0.5, Metric.parse("lp:2"), grid, max_workers=1)
    threaded = sweep(fam, 0.5, Metric.parse("lp:2"), grid, max_workers=4)
    assert serial.points == threaded.points
    assert serial.fitted_exponent == threaded.fitted_exponent


def test_needle_family_sweep_smoke():
    fam = NeedleSweepFamily(needle_count=20, epsilon=0.1, seed=0)
    res = sweep(fam, 0.5, Metric.parse("mixture_l1"), [1e-2, 1e-3, 1e-4])
    values = [v for _, v in res.points]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    assert values[-1] > 0.0
