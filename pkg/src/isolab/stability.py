"""Quantitative stability of the Gaussian isoperimetric bound on an interval.

For a centered 1-convex measure ``m = exp(-psi) dx`` on ``I`` the half-line
through the Gaussian ``theta``-quantile ``a_theta`` has perimeter
``exp(-psi(a_theta))``, which the Bakry-Ledoux inequality bounds below by the
Gaussian profile ``exp(-psi_g(a_theta))``.  The *deficit*

    delta = exp(-psi(a_theta)) - exp(-psi_g(a_theta))  >= 0

is the smallness parameter of every estimate in this module:

* two-sided potential-gap bounds: ``psi - psi_g`` dominates its tangent line
  of slope ``psi'_+(a_theta) - a_theta`` up to ``O(delta)`` from below on all
  of ``I``, and stays within ``O(sqrt(delta))`` of it from above on a window
  around ``a_theta`` that widens as ``delta`` shrinks;
* ``lp_distance``: the L^p(gamma) distance of the density ratio
  ``exp(psi_g - psi)`` from 1, with the convention that the ratio is 0 off
  ``I`` (so the integrand is 1 there, weighted by ``gamma(R \\ I)``);
* ``relative_entropy`` of ``m`` with respect to the Gaussian and the
  Talagrand inequality ``W_2^2 <= 2 Ent``;
* ``w1_to_gaussian`` / ``w2_to_gaussian`` through the one-dimensional
  quantile coupling, plus a Kantorovich-Rubinstein style upper bound for
  ``W_1``;
* the exactly solvable truncated-Gaussian family (:func:`example23`) whose
  closed forms make the order ``delta^{1/p}`` sharp.

The constants in the gap bounds are *fitted from samples*, never asserted
against theoretical values: the theory proves they exist, not what they are.
Two distinct small parameters appear for the truncated family: the
normalization excess ``delta_E`` with ``gamma(I) = (1+delta_E)^{-1}`` and the
isoperimetric deficit; at ``theta = 1/2`` they are related by
``deficit = delta_E / sqrt(2*pi)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import DomainError, InvariantViolation, QuadratureError
from .measure1d import (
    Measure1D,
    gaussian_profile,
    gaussian_psi,
    normalize,
    truncated_gaussian_potential,
)
from .numerics import (
    DEFAULT_SETTINGS,
    SQRT_2PI,
    Interval,
    QuadratureSettings,
    gaussian_cdf,
    gaussian_pdf,
    gaussian_quantile,
    integrate,
)

__all__ = [
    "DeficitReport",
    "GapBoundReport",
    "TalagrandReport",
    "Example23Family",
    "Example23ClosedForms",
    "center",
    "deficit",
    "slope_gap",
    "check_gap_bounds",
    "lp_distance",
    "relative_entropy",
    "w2_to_gaussian",
    "w1_to_gaussian",
    "talagrand_check",
    "w1_dual_bound",
    "example23",
]

# t-range for quantile-coupling integrals; the discarded Gaussian-type tails
# are accounted for by an analytic error bound in _quantile_coupling.
_T_CLIP = 1e-12
# deficits below this are treated as the exact equality case
_EQUALITY_TOL = 1e-13

_TRANSPORT_SETTINGS = QuadratureSettings(abs_tol=1e-10, rel_tol=1e-8)


@dataclass(frozen=True)
class DeficitReport:
    """Half-line perimeter vs the Gaussian profile at ``a_theta``."""

    theta: float
    a_theta: float
    shift: float
    perimeter_at_a: float
    profile_at_theta: float
    deficit: float

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "a_theta": self.a_theta,
            "shift": self.shift,
            "perimeter_at_a": self.perimeter_at_a,
            "profile_at_theta": self.profile_at_theta,
            "deficit": self.deficit,
        }


@dataclass(frozen=True)
class GapBoundReport:
    """Fitted constants for the two-sided potential-gap bounds.

    With ``gap(x) = psi(x) - psi_g(x)`` and ``s = slope_gap``, the report
    certifies at the sampled points::

        gap(x) >= s*(x - a_theta) - fitted_lower_constant * delta      on I
        gap(x) <= s*(x - a_theta) + fitted_upper_constant * sqrt(delta) on window

    both constants being the smallest nonnegative values that make the
    sampled inequalities true.  ``equality_case`` marks ``delta = 0`` (both
    bounds then collapse to exact linearity of the gap).
    """

    theta: float
    deficit: float
    slope_gap: float
    window: Interval
    fitted_lower_constant: float
    fitted_upper_constant: float
    pointwise_samples: Tuple[Tuple[float, float], ...]
    equality_case: bool
    lower_cap: Optional[float] = None
    upper_cap: Optional[float] = None
    passed_lower: Optional[bool] = None
    passed_upper: Optional[bool] = None

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "deficit": self.deficit,
            "slope_gap": self.slope_gap,
            "window": [self.window.lo, self.window.hi],
            "fitted_lower_constant": self.fitted_lower_constant,
            "fitted_upper_constant": self.fitted_upper_constant,
            "equality_case": self.equality_case,
            "passed_lower": self.passed_lower,
            "passed_upper": self.passed_upper,
        }


@dataclass(frozen=True)
class TalagrandReport:
    lhs: float  # W_2^2
    rhs: float  # 2 * relative entropy
    passed: bool

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "talagrand_pass": self.passed}


@dataclass(frozen=True)
class Example23Family:
    """Truncated Gaussian on (-D, D): ``gamma(I) = (1 + delta_E)^{-1}``."""

    D: float
    delta_E: float


@dataclass(frozen=True)
class Example23ClosedForms:
    """Exact deficit and L^p distance of the truncated family at theta=1/2."""

    deficit: float
    lp: Callable[[float], float]


def center(m: Measure1D, theta: float) -> Tuple[Measure1D, float]:
    """Translate ``m`` so its ``theta``-quantile sits at ``a_theta``.

    Returns ``(m_centered, shift)`` where ``shift = a_theta - quantile(m,
    theta)`` is the translation applied; centering a measure twice is a
    no-op and a pre-translated Gaussian comes back standard.  Translation
    preserves 1-convexity and normalization.
    """
    theta = float(theta)
    if not 0.0 < theta < 1.0:
        raise DomainError(f"center: theta={theta!r} outside (0, 1)")
    a_theta = gaussian_quantile(theta)
    shift = a_theta - m.quantile(theta)
    return m.translate(shift), shift


def deficit(m: Measure1D, theta: float) -> DeficitReport:
    """Isoperimetric deficit of the half-line at ``a_theta``.

    ``m`` is centered internally first; the report records the shift.  For
    1-convex input the deficit is nonnegative (up to 1e-9 of quadrature
    noise) because the half-line is an admissible competitor in the
    isoperimetric inequality.
    """
    centered, shift = center(m, theta)
    a_theta = gaussian_quantile(theta)
    peri = float(centered.density(a_theta))
    prof = gaussian_profile(theta)
    return DeficitReport(
        theta=theta,
        a_theta=a_theta,
        shift=shift,
        perimeter_at_a=peri,
        profile_at_theta=prof,
        deficit=peri - prof,
    )


def slope_gap(m: Measure1D, theta: float) -> float:
    """Right-slope mismatch ``psi'_+(a_theta) - a_theta`` after centering.

    Zero for the Gaussian and for any family whose potential is ``x^2/2 +
    const`` near ``a_theta``; equals the kink size for a potential with a
    slope jump exactly at ``a_theta``.
    """
    centered, _ = center(m, theta)
    a_theta = gaussian_quantile(theta)
    return float(centered.psi_right_derivative(a_theta)) - a_theta


def default_gap_window(m: Measure1D, theta: float, delta: float) -> Interval:
    """Default window for the upper gap bound:
    ``[a_theta - sqrt(2 ln(1/delta)), a_theta + sqrt(2 ln(1/delta))]``
    intersected with the domain (it widens as the deficit shrinks)."""
    a_theta = gaussian_quantile(theta)
    if delta >= 1.0 or delta <= 0.0:
        half = 1.0
    else:
        half = math.sqrt(2.0 * math.log(1.0 / delta))
    centered, _ = center(m, theta)
    win = Interval(a_theta - half, a_theta + half).intersect(centered.domain)
    if win is None:  # cannot happen: a_theta is interior after centering
        raise DomainError("window does not intersect the centered domain")
    return win


def check_gap_bounds(
    m: Measure1D,
    theta: float,
    window: Optional[Interval] = None,
    sample_count: int = 1000,
    *,
    lower_cap: Optional[float] = None,
    upper_cap: Optional[float] = None,
) -> GapBoundReport:
    """Fit the smallest constants making the two gap bounds hold on samples.

    The lower bound is sampled on (the numerically reachable part of) all of
    ``I``; the upper bound on ``window`` (default
    :func:`default_gap_window`).  ``delta = 0`` degenerates both bounds to a
    linearity check of the gap, reported as ``equality_case`` with both
    constants 0.  When ``lower_cap`` / ``upper_cap`` are given, the report
    carries pass flags ``fitted <= cap``.
    """
    if sample_count < 8:
        raise DomainError("sample_count must be at least 8")
    rep = deficit(m, theta)
    delta = rep.deficit
    centered, _ = center(m, theta)
    a_theta = rep.a_theta
    if window is None:
        window = default_gap_window(m, theta, max(delta, _EQUALITY_TOL))
    else:
        clipped = window.intersect(centered.domain)
        if clipped is None:
            raise DomainError("window must intersect the centered domain")
        window = clipped

    sg = float(centered.psi_right_derivative(a_theta)) - a_theta

    def gap_at(xs: np.ndarray) -> np.ndarray:
        return np.asarray(centered.psi(xs), dtype=float) - np.asarray(
            gaussian_psi(xs), dtype=float
        )

    # lower-bound samples span the full interval (quantile range), upper-
    # bound samples only the window
    lo_s = min(window.lo, centered.quantile(_T_CLIP))
    hi_s = max(window.hi, centered.quantile(1.0 - _T_CLIP))
    lo_s = max(lo_s, -centered.settings.tail_cutoff)
    hi_s = min(hi_s, centered.settings.tail_cutoff)
    xs_lower = np.linspace(lo_s, hi_s, sample_count)
    xs_upper = np.linspace(window.lo, window.hi, sample_count)

    g_lower = gap_at(xs_lower) - sg * (xs_lower - a_theta)
    g_upper = gap_at(xs_upper) - sg * (xs_upper - a_theta)

    stride = max(1, sample_count // 101)
    samples = tuple(
        (float(x), float(g)) for x, g in zip(xs_upper[::stride], gap_at(xs_upper)[::stride])
    )

    if delta <= _EQUALITY_TOL:
        c_low = 0.0
        c_up = 0.0
        equality = True
    else:
        c_low = max(0.0, float(-np.min(g_lower))) / delta
        c_up = max(0.0, float(np.max(g_upper))) / math.sqrt(delta)
        equality = False

    return GapBoundReport(
        theta=theta,
        deficit=delta,
        slope_gap=sg,
        window=window,
        fitted_lower_constant=c_low,
        fitted_upper_constant=c_up,
        pointwise_samples=samples,
        equality_case=equality,
        lower_cap=lower_cap,
        upper_cap=upper_cap,
        passed_lower=(c_low <= lower_cap) if lower_cap is not None else None,
        passed_upper=(c_up <= upper_cap) if upper_cap is not None else None,
    )


def _gaussian_tail_mass(domain: Interval) -> float:
    """``gamma(R \\ I)`` -- the Gaussian mass off the domain."""
    below = gaussian_cdf(domain.lo) if math.isfinite(domain.lo) else 0.0
    above = 1.0 - gaussian_cdf(domain.hi) if math.isfinite(domain.hi) else 0.0
    return below + above


def _interior_knots(m: Measure1D, extra: Tuple[float, ...] = ()) -> Optional[Tuple[float, ...]]:
    """Potential kinks (plus ``extra``) strictly inside the domain, or None."""
    dom = m.domain
    pts = sorted({k for k in (*m.potential.knots(), *extra) if dom.lo < k < dom.hi})
    return tuple(pts) or None


def lp_distance(m: Measure1D, p: float) -> float:
    """``|| exp(psi_g - psi) - 1 ||_{L^p(gamma)}`` with off-domain ratio 0.

    Off ``I`` the density ratio is taken to be 0, so the integrand there is
    ``|0 - 1|^p = 1`` and contributes exactly ``gamma(R \\ I)``.  ``p`` must
    lie in [1, 64]: the ratio is exponentiated by ``p`` inside the integral
    and beyond 64 intermediate terms can overflow double precision even for
    tame gaps.
    """
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise DomainError(f"lp_distance: p={p!r} must be >= 1")
    if p > 64.0:
        raise DomainError("lp_distance: p > 64 overflows intermediate terms")

    def integrand(x: float) -> float:
        # ratio via exp of the potential difference: stable where both
        # densities underflow
        g = float(gaussian_psi(x)) - float(m.psi(x))
        return abs(math.exp(g) - 1.0) ** p * gaussian_pdf(x)

    inside = integrate(integrand, m.domain, m.settings, points=_interior_knots(m))
    outside = _gaussian_tail_mass(m.domain)
    return (inside + outside) ** (1.0 / p)


def relative_entropy(m: Measure1D) -> float:
    """``Ent(m | gamma) = int_I (psi_g - psi) dm >= 0``.

    Tiny negative quadrature noise (within 10x the absolute tolerance) is
    clamped to 0; a genuinely negative value would contradict Jensen's
    inequality and raises ``InvariantViolation``.
    """

    def integrand(x: float) -> float:
        return (float(gaussian_psi(x)) - float(m.psi(x))) * float(m.density(x))

    value = integrate(integrand, m.domain, m.settings, points=_interior_knots(m))
    if value < 0.0:
        if value >= -10.0 * m.settings.abs_tol:
            return 0.0
        raise InvariantViolation(f"relative entropy came out negative: {value!r}")
    return value


def _quantile_coupling(m: Measure1D, power: int) -> float:
    """``int_0^1 |F_m^{-1}(t) - Phi^{-1}(t)|^power dt`` by quadrature.

    Computed after the substitution ``t = Phi(s)`` as ``int |F_m^{-1}(Phi(s))
    - s|^power phi(s) ds``: in the ``t`` variable the integrand piles into
    boundary layers at 0 and 1, while in ``s`` it is a Gaussian-damped,
    polynomially growing profile that adaptive quadrature resolves cleanly.
    The s-range is clipped to the ``[1e-12, 1 - 1e-12]`` quantile window;
    the discarded tails are bounded analytically using the quantile
    differences at the clip points (1-convexity keeps the difference from
    growing toward the endpoints faster than a constant plus the clip-point
    value).  A non-negligible tail bound is reported as a failure rather
    than absorbed.
    """

    def diff(t: float) -> float:
        return m.quantile(t) - gaussian_quantile(t)

    s_lo = gaussian_quantile(_T_CLIP)
    s_hi = gaussian_quantile(1.0 - _T_CLIP)

    def integrand(s: float) -> float:
        t = gaussian_cdf(s)
        t = min(max(t, _T_CLIP), 1.0 - _T_CLIP)
        return abs(m.quantile(t) - s) ** power * gaussian_pdf(s)

    # The map s -> F_m^{-1}(Phi(s)) has derivative jumps at the images of the
    # potential's kinks; hand those to the quadrature as interior breakpoints.
    kink_images = []
    for b in m.potential.knots():
        t = m.cdf(b)
        if _T_CLIP < t < 1.0 - _T_CLIP:
            s = gaussian_quantile(t)
            if s_lo < s < s_hi:
                kink_images.append(s)

    try:
        value = integrate(
            integrand,
            Interval(s_lo, s_hi),
            _TRANSPORT_SETTINGS,
            points=tuple(sorted(set(kink_images))) or None,
        )
    except QuadratureError as exc:
        raise QuadratureError(
            f"quantile-coupling integral failed near the endpoints: {exc}"
        ) from exc
    tail_bound = _T_CLIP * (
        (abs(diff(_T_CLIP)) + 1.0) ** power + (abs(diff(1.0 - _T_CLIP)) + 1.0) ** power
    )
    if tail_bound > 1e-8:
        raise QuadratureError(
            f"clipped endpoint mass bound {tail_bound:.3e} is not negligible"
        )
    return value


def w2_to_gaussian(m: Measure1D) -> float:
    """Quadratic Wasserstein distance to the standard Gaussian.

    One-dimensional optimal transport is the monotone (quantile) coupling:
    ``W_2^2 = int_0^1 (F_m^{-1}(t) - Phi^{-1}(t))^2 dt``.
    """
    return math.sqrt(max(0.0, _quantile_coupling(m, 2)))


def w1_to_gaussian(m: Measure1D) -> float:
    """First Wasserstein distance to the Gaussian (quantile coupling);
    always ``<= w2_to_gaussian`` by Hoelder."""
    return _quantile_coupling(m, 1)


def talagrand_check(m: Measure1D) -> TalagrandReport:
    """Check ``W_2^2 <= 2 Ent`` (a theorem for 1-convex measures)."""
    lhs = w2_to_gaussian(m) ** 2
    rhs = 2.0 * relative_entropy(m)
    return TalagrandReport(lhs=lhs, rhs=rhs, passed=bool(lhs <= rhs + 1e-8))


def w1_dual_bound(m: Measure1D, theta: float) -> float:
    """Kantorovich-Rubinstein style upper bound for ``W_1(m, gamma)``.

    Returns ``int |x - a_theta| * |exp(psi_g - psi) - 1| dgamma`` with the
    off-domain ratio-0 convention (the integrand is ``|x - a_theta|`` times
    the Gaussian density off ``I``).  ``m`` is centered internally; for a
    centered measure ``w1_to_gaussian(m) <= w1_dual_bound(m, theta) + 1e-8``.
    The test function ``x -> |x - a_theta|`` is 1-Lipschitz, which is what
    makes this a valid dual bound.
    """
    centered, _ = center(m, theta)
    a_theta = gaussian_quantile(theta)

    def inside(x: float) -> float:
        g = float(gaussian_psi(x)) - float(centered.psi(x))
        return abs(x - a_theta) * abs(math.exp(g) - 1.0) * gaussian_pdf(x)

    def outside(x: float) -> float:
        return abs(x - a_theta) * gaussian_pdf(x)

    total = integrate(
        inside, centered.domain, centered.settings,
        points=_interior_knots(centered, (a_theta,)),
    )
    dom = centered.domain
    if math.isfinite(dom.lo):
        total += integrate(outside, Interval(-math.inf, dom.lo), centered.settings)
    if math.isfinite(dom.hi):
        total += integrate(outside, Interval(dom.hi, math.inf), centered.settings)
    return total


def example23(D: float) -> Tuple[Measure1D, Example23Family, Example23ClosedForms]:
    """The exactly solvable truncated-Gaussian family on ``(-D, D)``.

    The measure is ``(1+delta_E) * gamma`` restricted to ``(-D, D)`` with
    ``gamma((-D, D)) = (1+delta_E)^{-1}``.  At ``theta = 1/2`` everything is
    explicit:

        deficit = delta_E / sqrt(2*pi)
        lp(p)   = ((1 + delta_E^{p-1}) / (1 + delta_E))^{1/p} * delta_E^{1/p}

    which realizes the order ``delta^{1/p}`` exactly -- the family showing
    the L^p stability exponent is sharp.
    """
    if not (D > 0.0 and math.isfinite(D)):
        raise DomainError(f"example23: D={D!r} must be positive and finite")
    gamma_I = gaussian_cdf(D) - gaussian_cdf(-D)
    delta_E = 1.0 / gamma_I - 1.0
    m = normalize(truncated_gaussian_potential(D))
    fam = Example23Family(D=float(D), delta_E=float(delta_E))

    def lp_closed(p: float) -> float:
        p = float(p)
        if p < 1.0:
            raise DomainError("closed-form lp needs p >= 1")
        return ((1.0 + delta_E ** (p - 1.0)) / (1.0 + delta_E)) ** (1.0 / p) * (
            delta_E ** (1.0 / p)
        )

    closed = Example23ClosedForms(deficit=delta_E / SQRT_2PI, lp=lp_closed)
    return m, fam, closed
