"""Numerical verification of Gaussian isoperimetric stability.

One-dimensional weighted measures ``dm = exp(-psi) dx`` with ``psi - x^2/2``
convex satisfy the Bakry-Ledoux comparison ``P(A) >= I(m(A))`` against the
Gaussian isoperimetric profile ``I``.  This package measures how far such a
measure is from the extremal (Gaussian) case: isoperimetric deficits of
half-lines, two-sided bounds on the potential gap, L^p / entropy /
Wasserstein distances to the Gaussian, and aggregation experiments over
synthetic "needle" mixtures -- all with empirical convergence-order fits.
"""
from .errors import (
    BracketError,
    ConfigError,
    DomainError,
    FitError,
    InfeasibleError,
    InvalidPotentialError,
    InvariantViolation,
    IsolabError,
    NonIntegrableError,
    QuadratureError,
)
from .measure1d import (
    BoundarySet,
    ConvexityReport,
    Measure1D,
    MinimizerResult,
    PotentialSpec,
    boundary_set,
    brute_force_minimizer,
    check_one_convexity,
    gaussian_measure,
    gaussian_potential,
    gaussian_profile,
    gaussian_psi,
    half_line_perimeter,
    normalize,
    perimeter,
    perturbed_gaussian_potential,
    potential_from_config,
    tabulated_potential,
    tabulated_potential_from_csv,
    translate_potential,
    truncated_gaussian_potential,
)
from .needles import (
    AggregateReport,
    ClassificationReport,
    DisintegrationReport,
    EnsembleConfig,
    Needle,
    NeedleEnsemble,
    Theorem31Report,
    aggregate_l1,
    classify_centered,
    classify_good,
    disintegration_check,
    ensemble_to_dict,
    generate_ensemble,
    make_needle,
    mixture_density,
    needle_l1,
    shifted_gaussian_l1,
    theorem31_experiment,
)
from .numerics import (
    DEFAULT_SETTINGS,
    REAL_LINE,
    Interval,
    QuadratureSettings,
    find_root,
    gaussian_cdf,
    gaussian_pdf,
    gaussian_quantile,
    integrate,
)
from .rates import (
    DEFAULT_DELTA_GRID,
    Example23SweepFamily,
    GaussianSweepFamily,
    Metric,
    NeedleSweepFamily,
    PerturbedSweepFamily,
    SweepResult,
    fit_exponent,
    sweep,
    worker_count,
)
from .stability import (
    DeficitReport,
    Example23ClosedForms,
    Example23Family,
    GapBoundReport,
    TalagrandReport,
    center,
    check_gap_bounds,
    deficit,
    default_gap_window,
    example23,
    lp_distance,
    relative_entropy,
    slope_gap,
    talagrand_check,
    w1_dual_bound,
    w1_to_gaussian,
    w2_to_gaussian,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateReport",
    "BoundarySet",
    "BracketError",
    "ClassificationReport",
    "ConfigError",
    "ConvexityReport",
    "DEFAULT_DELTA_GRID",
    "DEFAULT_SETTINGS",
    "DeficitReport",
    "DisintegrationReport",
    "DomainError",
    "EnsembleConfig",
    "Example23ClosedForms",
    "Example23Family",
    "Example23SweepFamily",
    "FitError",
    "GapBoundReport",
    "GaussianSweepFamily",
    "InfeasibleError",
    "Interval",
    "InvalidPotentialError",
    "InvariantViolation",
    "IsolabError",
    "Measure1D",
    "Metric",
    "MinimizerResult",
    "Needle",
    "NeedleEnsemble",
    "NeedleSweepFamily",
    "NonIntegrableError",
    "PerturbedSweepFamily",
    "PotentialSpec",
    "QuadratureError",
    "QuadratureSettings",
    "REAL_LINE",
    "SweepResult",
    "TalagrandReport",
    "Theorem31Report",
    "aggregate_l1",
    "boundary_set",
    "brute_force_minimizer",
    "center",
    "check_gap_bounds",
    "check_one_convexity",
    "classify_centered",
    "classify_good",
    "deficit",
    "default_gap_window",
    "disintegration_check",
    "ensemble_to_dict",
    "example23",
    "find_root",
    "fit_exponent",
    "gaussian_cdf",
    "gaussian_measure",
    "gaussian_pdf",
    "gaussian_potential",
    "gaussian_profile",
    "gaussian_psi",
    "gaussian_quantile",
    "generate_ensemble",
    "half_line_perimeter",
    "integrate",
    "lp_distance",
    "make_needle",
    "mixture_density",
    "needle_l1",
    "normalize",
    "perimeter",
    "perturbed_gaussian_potential",
    "potential_from_config",
    "relative_entropy",
    "shifted_gaussian_l1",
    "slope_gap",
    "sweep",
    "tabulated_potential",
    "tabulated_potential_from_csv",
    "talagrand_check",
    "theorem31_experiment",
    "translate_potential",
    "truncated_gaussian_potential",
    "w1_dual_bound",
    "w1_to_gaussian",
    "w2_to_gaussian",
    "worker_count",
]
