"""Spin self-rephasing in trapped atomic ensembles.

Simulates the energy-space kinetic equation for the ensemble spin density
of a trapped thermal gas, where the exchange mean field of colliding
identical atoms synchronizes spins that precess at energy-dependent rates.
Provides the rate formulas and regime classification, Gauss-Laguerre
quadrature over the motional-energy distribution, a fixed-step RK4 solver
(compiled kernel with a numpy fallback), a two-class reduced model, the
Ramsey measurement protocol with fringe fitting, and the standard
decay/revival analysis fits.
"""

__version__ = "0.1.0"

from .backend import BACKEND
from .grid import EnergyGrid, GridScheme, average, build_gauss, build_uniform
from .kinetic import (
    PAR,
    PERP1,
    PERP2,
    ContrastCurve,
    KernelKind,
    KernelSpec,
    NonFiniteStateError,
    NumericsError,
    SpinField,
    UnstableStepError,
    analytic_contrast,
    build_kernel_matrix,
    evolve,
    exchange_gain,
    max_stable_dt,
    rhs,
    u_par,
    u_perp1,
    u_perp2,
)
from .ramsey import (
    AtomNumberFit,
    DecayFit,
    FitError,
    FringeScan,
    NoRevivalError,
    RamseyConfig,
    apply_pulse,
    contrast_vs_time,
    fit_atom_number,
    fit_exponential_decay,
    fit_fringe,
    fit_revival_time,
    fringe_scan,
    ramsey_sequence,
    read_xy_csv,
)
from .rates import (
    AtomicParams,
    RateSet,
    Regime,
    RegimeReport,
    TrapParams,
    classify_regime,
    exchange_rate,
    inhomogeneity_scale,
    lateral_collision_rate,
    mean_field_shift,
    rates_from_atomic,
    thermal_velocity,
)
from .twoclass import (
    TwoClassState,
    evolve_two_class,
    two_class_rephasing_estimate,
    two_class_revival_estimate,
)

__all__ = [
    "__version__",
    "BACKEND",
    "EnergyGrid",
    "GridScheme",
    "average",
    "build_gauss",
    "build_uniform",
    "PAR",
    "PERP1",
    "PERP2",
    "ContrastCurve",
    "KernelKind",
    "KernelSpec",
    "NonFiniteStateError",
    "NumericsError",
    "SpinField",
    "UnstableStepError",
    "analytic_contrast",
    "build_kernel_matrix",
    "evolve",
    "exchange_gain",
    "max_stable_dt",
    "rhs",
    "u_par",
    "u_perp1",
    "u_perp2",
    "AtomNumberFit",
    "DecayFit",
    "FitError",
    "FringeScan",
    "NoRevivalError",
    "RamseyConfig",
    "apply_pulse",
    "contrast_vs_time",
    "fit_atom_number",
    "fit_exponential_decay",
    "fit_fringe",
    "fit_revival_time",
    "fringe_scan",
    "ramsey_sequence",
    "read_xy_csv",
    "AtomicParams",
    "RateSet",
    "Regime",
    "RegimeReport",
    "TrapParams",
    "classify_regime",
    "exchange_rate",
    "inhomogeneity_scale",
    "lateral_collision_rate",
    "mean_field_shift",
    "rates_from_atomic",
    "thermal_velocity",
    "TwoClassState",
    "evolve_two_class",
    "two_class_rephasing_estimate",
    "two_class_revival_estimate",
]
