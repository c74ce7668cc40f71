import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle_constants as oc
from oracle_erf import gaussian_cdf_oracle
from isolab import (
    DomainError,
    Interval,
    InvalidPotentialError,
    boundary_set,
    brute_force_minimizer,
    center,
    check_one_convexity,
    gaussian_measure,
    gaussian_potential,
    gaussian_profile,
    gaussian_quantile,
    half_line_perimeter,
    normalize,
    perimeter,
    perturbed_gaussian_potential,
    potential_from_config,
    tabulated_potential,
    translate_potential,
    truncated_gaussian_potential,
)

# module-scoped measures: normalization is the expensive part
GAUSSIAN = gaussian_measure()
TRUNCATED_2 = normalize(truncated_gaussian_potential(2.0))
KINKED = normalize(
    perturbed_gaussian_potential((-0.7, 0.4, 1.1), (-0.6, -0.1, 0.3, 0.9))
)


# -- potentials ---------------------------------------------------------------


def test_gaussian_potential_is_normalized_already():
    spec = gaussian_potential()
    assert math.exp(-float(spec.value(0.0))) == pytest.approx(oc.INV_SQRT_2PI, rel=1e-14)
    assert float(spec.right_derivative(1.7)) == pytest.approx(1.7)


def test_truncated_potential_domain():
    spec = truncated_gaussian_potential(2.0)
    assert spec.domain == Interval(-2.0, 2.0)
    asym = truncated_gaussian_potential(lo=-1.0, hi=3.0)
    assert asym.domain == Interval(-1.0, 3.0)


def test_perturbed_potential_validation():
    with pytest.raises(InvalidPotentialError):
        perturbed_gaussian_potential((0.0,), (1.0,))  # slopes too short
    with pytest.raises(InvalidPotentialError):
        perturbed_gaussian_potential((1.0, 0.0), (0.0, 0.1, 0.2))  # unordered
    with pytest.raises(InvalidPotentialError):
        perturbed_gaussian_potential((0.0,), (0.5, 0.1))  # decreasing slopes


def test_tabulated_rejects_non_one_convex_table():
    xs = np.linspace(-2.0, 2.0, 41)
    with pytest.raises(InvalidPotentialError):
        tabulated_potential(xs, 0.25 * xs**2)  # psi - x^2/2 concave


def test_knots_follow_translation():
    spec = perturbed_gaussian_potential((-0.5, 0.8), (-0.2, 0.0, 0.4))
    assert spec.knots() == (-0.5, 0.8)
    moved = translate_potential(spec, 1.25)
    assert moved.knots() == pytest.approx((0.75, 2.05))
    assert gaussian_potential().knots() == ()


def test_potential_config_round_trip():
    spec = perturbed_gaussian_potential((-0.5, 0.8), (-0.2, 0.0, 0.4))
    spec = translate_potential(spec, 0.3)
    back = potential_from_config(spec.to_dict())
    xs = np.linspace(-3.0, 3.0, 17)
    assert np.allclose(back.value(xs), spec.value(xs), atol=1e-14)
    assert back.domain == spec.domain


def test_potential_config_errors():
    with pytest.raises(DomainError):
        potential_from_config({"family": "does_not_exist"})
    with pytest.raises(DomainError):
        potential_from_config({"family": "perturbed_gaussian"})  # missing keys
    with pytest.raises(DomainError):
        potential_from_config({"family": "gaussian", "stray": 1})


# -- normalized measures ------------------------------------------------------


def test_gaussian_measure_density_and_cdf():
    assert GAUSSIAN.density(0.0) == pytest.approx(oc.INV_SQRT_2PI, rel=1e-12)
    assert GAUSSIAN.cdf(1.0) == pytest.approx(oc.PHI_1, abs=1e-11)
    assert GAUSSIAN.quantile(oc.PHI_1) == pytest.approx(1.0, abs=1e-9)


def test_truncated_cdf_closed_form():
    # F(x) = (Phi(x) - Phi(-2)) * (1 + delta_E) inside (-2, 2)
    for x in (-1.5, -0.3, 0.0, 0.9, 1.8):
        want = (gaussian_cdf_oracle(x) - oc.PHI_MINUS_2) * (1.0 + oc.DELTA_E_D2)
        assert TRUNCATED_2.cdf(x) == pytest.approx(want, abs=1e-9)
    assert TRUNCATED_2.cdf(2.0) == pytest.approx(1.0, abs=1e-11)
    assert TRUNCATED_2.cdf(-2.0) == pytest.approx(0.0, abs=1e-11)


def test_kinked_table_reaches_full_mass():
    # cells aligned with the potential kinks: the top of the cdf table must
    # agree with the normalizer to ~1e-11, or extreme quantiles break
    hi_mass = KINKED.cdf(30.0)
    assert hi_mass == pytest.approx(1.0, abs=1e-10)
    q = KINKED.quantile(1.0 - 1e-7)
    assert KINKED.cdf(q) == pytest.approx(1.0 - 1e-7, abs=1e-11)


@pytest.mark.parametrize("m", [GAUSSIAN, TRUNCATED_2, KINKED], ids=["gaussian", "truncated", "kinked"])
def test_quantile_cdf_round_trip(m):
    for theta in (1e-6, 0.02, 0.31, 0.5, 0.77, 0.999, 1 - 1e-6):
        q = m.quantile(theta)
        assert m.cdf(q) == pytest.approx(theta, abs=2e-11)


@given(theta=st.floats(min_value=1e-6, max_value=1 - 1e-6))
@settings(max_examples=40, deadline=None)
def test_kinked_quantile_round_trip_property(theta):
    assert KINKED.cdf(KINKED.quantile(theta)) == pytest.approx(theta, abs=2e-11)


@given(
    a=st.floats(min_value=0.01, max_value=0.99),
    b=st.floats(min_value=0.01, max_value=0.99),
)
@settings(max_examples=40, deadline=None)
def test_quantile_monotone_property(a, b):
    lo, hi = sorted((a, b))
    assert KINKED.quantile(lo) <= KINKED.quantile(hi) + 1e-12


def test_quantile_rejects_bad_theta():
    for bad in (0.0, 1.0, -1.0, math.nan):
        with pytest.raises(DomainError):
            GAUSSIAN.quantile(bad)


def test_translate_moves_quantiles():
    moved = TRUNCATED_2.translate(0.9)
    assert moved.domain == Interval(-1.1, 2.9)
    assert moved.quantile(0.5) == pytest.approx(TRUNCATED_2.quantile(0.5) + 0.9, abs=1e-10)
    assert moved.density(0.9) == pytest.approx(TRUNCATED_2.density(0.0), rel=1e-12)


def test_center_puts_quantile_at_a_theta():
    for theta in (0.2, 0.5, 0.8):
        centered, shift = center(KINKED, theta)
        a_theta = gaussian_quantile(theta)
        assert centered.quantile(theta) == pytest.approx(a_theta, abs=1e-9)
        assert shift == pytest.approx(a_theta - KINKED.quantile(theta), abs=1e-12)


def test_center_undoes_translation_of_gaussian():
    shifted = GAUSSIAN.translate(0.61)
    centered, shift = center(shifted, 0.5)
    assert shift == pytest.approx(-0.61, abs=1e-9)
    assert centered.quantile(0.5) == pytest.approx(0.0, abs=1e-9)


# -- convexity check ----------------------------------------------------------


def test_one_convexity_accepts_the_construction():
    for spec in (gaussian_potential(), truncated_gaussian_potential(1.5), KINKED.potential):
        report = check_one_convexity(spec)
        assert report.passed
        assert report.worst_violation <= 1e-9


def test_one_convexity_rejects_quarter_parabola():
    xs = np.linspace(-2.0, 2.0, 41)
    # sneak the non-1-convex table past construction, the checker must catch it
    spec = tabulated_potential(xs, 0.25 * xs**2, convexity_tol=1e6)
    report = check_one_convexity(spec)
    assert not report.passed
    assert report.worst_violation > 1e-3


def test_one_convexity_grid_validation():
    with pytest.raises(DomainError):
        check_one_convexity(gaussian_potential(), grid_points=2)


# -- profile, perimeters, boundary sets ---------------------------------------


def test_gaussian_profile_values():
    assert gaussian_profile(0.5) == pytest.approx(oc.INV_SQRT_2PI, rel=1e-13)
    assert gaussian_profile(oc.PHI_1) == pytest.approx(oc.PDF_AT_1, rel=1e-10)
    assert gaussian_profile(0.23) == pytest.approx(gaussian_profile(0.77), rel=1e-11)


def test_half_line_perimeter_cases():
    assert half_line_perimeter(GAUSSIAN, 0.0) == pytest.approx(oc.INV_SQRT_2PI, rel=1e-12)
    assert half_line_perimeter(TRUNCATED_2, 0.0, "right") == pytest.approx(
        oc.HALF_LINE_PERIMETER_D2, rel=1e-11
    )
    assert half_line_perimeter(TRUNCATED_2, 2.5) == 0.0  # beyond the domain
    with pytest.raises(DomainError):
        half_line_perimeter(GAUSSIAN, 0.0, side="middle")


def test_boundary_set_and_perimeter():
    bset = boundary_set(GAUSSIAN, (Interval(-1.0, 0.0), Interval(0.5, 2.0)))
    assert bset.boundary_points == pytest.approx((-1.0, 0.0, 0.5, 2.0))
    want_mass = (
        0.5 - gaussian_cdf_oracle(-1.0) + gaussian_cdf_oracle(2.0) - gaussian_cdf_oracle(0.5)
    )
    assert bset.total_measure == pytest.approx(want_mass, abs=1e-10)
    want_peri = sum(GAUSSIAN.density(x) for x in (-1.0, 0.0, 0.5, 2.0))
    assert perimeter(GAUSSIAN, bset) == pytest.approx(want_peri, rel=1e-12)


def test_boundary_set_rejects_touching_pieces():
    with pytest.raises(DomainError):
        boundary_set(GAUSSIAN, (Interval(-1.0, 0.0), Interval(0.0, 1.0)))
    with pytest.raises(DomainError):
        boundary_set(TRUNCATED_2, (Interval(3.0, 4.0),))


def test_boundary_set_clips_to_domain():
    bset = boundary_set(TRUNCATED_2, (Interval(-5.0, 0.0),))
    assert bset.boundary_points == pytest.approx((0.0,))
    assert bset.total_measure == pytest.approx(0.5, abs=1e-10)


# -- brute-force minimizer ----------------------------------------------------


def test_minimizer_gaussian_half_line_wins():
    for theta, want in ((0.5, oc.INV_SQRT_2PI), (oc.PHI_1, oc.PDF_AT_1)):
        res = brute_force_minimizer(GAUSSIAN, theta)
        assert res.is_half_line
        assert res.perimeter == pytest.approx(want, abs=1e-9)
        assert res.candidates_checked > 1000


def test_minimizer_truncated_half_line_value():
    res = brute_force_minimizer(TRUNCATED_2, 0.5)
    assert res.is_half_line
    assert res.perimeter == pytest.approx(oc.HALF_LINE_PERIMETER_D2, abs=1e-9)


def test_minimizer_result_reports_a_theta_mass():
    res = brute_force_minimizer(KINKED, 0.3)
    assert res.boundary_set.total_measure == pytest.approx(0.3, abs=1e-8)
    assert res.perimeter >= gaussian_profile(0.3) - 1e-6  # Bakry-Ledoux


def test_minimizer_theta_validation():
    with pytest.raises(DomainError):
        brute_force_minimizer(GAUSSIAN, 1.2)
