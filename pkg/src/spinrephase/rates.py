"""Dynamical rates of the spin self-rephasing model.

Converts atomic and trap parameters into the three rates that drive the
energy-space spin dynamics:

* ``delta0``   - inhomogeneity scale of the transition-frequency spread
                 (the longitudinal precession rate of an atom with total
                 motional energy E, in units of k_B T, is delta0 * E),
* ``omega_ex`` - exchange rate of the identical spin rotation effect,
* ``gamma_c``  - rate of lateral (energy-changing) elastic collisions,

and classifies the dynamical regime they imply.  All rates are stored in
angular units (rad/s for frequencies, 1/s for gamma_c); Hz appears only
at I/O boundaries.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .constants import K_B, HBAR, TWO_PI


class Regime(enum.Enum):
    """Qualitative behaviour of the ensemble coherence."""

    TIGHT_SYNC = "TightSync"  # omega_ex >> delta0: dephasing refocused immediately
    LOSS_AND_REVIVAL = "LossAndRevival"  # omega_ex ≳ delta0: contrast dips, then revives
    DEPHASING = "Dephasing"  # exchange too weak: ordinary inhomogeneous decay


@dataclass(frozen=True)
class AtomicParams:
    """Gas parameters of a trapped thermal ensemble (SI units).

    ``scattering_length_a01`` is the cross-state s-wave scattering length
    that sets both the exchange and the collision rate.  The intrastate
    lengths are carried for documentation only (the single-length rate
    formulas assume they are all approximately equal).
    """

    mass: float  # kg
    scattering_length_a01: float  # m
    density_nbar: float  # m^-3, ensemble-average density
    temperature: float  # K
    scattering_length_a00: float | None = None  # m, documentation
    scattering_length_a11: float | None = None  # m, documentation

    def __post_init__(self) -> None:
        if not (self.mass > 0.0 and math.isfinite(self.mass)):
            raise ValueError(f"mass must be > 0, got {self.mass}")
        if not (self.temperature > 0.0 and math.isfinite(self.temperature)):
            raise ValueError(f"temperature must be > 0, got {self.temperature}")
        if not (self.density_nbar >= 0.0 and math.isfinite(self.density_nbar)):
            raise ValueError(f"density_nbar must be >= 0, got {self.density_nbar}")
        if not (abs(self.scattering_length_a01) > 0.0):
            raise ValueError("scattering_length_a01 must be nonzero")


@dataclass(frozen=True)
class TrapParams:
    """Harmonic trap angular frequencies, rad/s."""

    omega_x: float
    omega_y: float
    omega_z: float

    def __post_init__(self) -> None:
        for name in ("omega_x", "omega_y", "omega_z"):
            v = getattr(self, name)
            if not (v > 0.0 and math.isfinite(v)):
                raise ValueError(f"{name} must be > 0, got {v}")

    @classmethod
    def from_hz(cls, fx: float, fy: float, fz: float) -> "TrapParams":
        return cls(TWO_PI * fx, TWO_PI * fy, TWO_PI * fz)

    @property
    def omega_min(self) -> float:
        return min(self.omega_x, self.omega_y, self.omega_z)


@dataclass(frozen=True)
class RateSet:
    """The dynamical rates entering the kinetic equation.

    ``exchange_renorm`` scales the exchange rate actually applied in the
    dynamics (``omega_ex * exchange_renorm``).  The infinite-range kernel
    approximation overestimates synchronization; a value of 0.6 compensates
    for that when ``omega_ex`` is the bare rate derived from atomic
    parameters.  Default 1.0 (no renormalization).
    """

    delta0: float  # rad/s, inhomogeneity scale
    omega_ex: float  # rad/s, exchange (ISRE) rate
    gamma_c: float  # 1/s, lateral elastic collision rate
    detuning: float = 0.0  # rad/s, Ramsey detuning delta_R
    exchange_renorm: float = 1.0  # dimensionless, in (0, 1]

    def __post_init__(self) -> None:
        for name in ("delta0", "omega_ex", "gamma_c", "detuning"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.gamma_c < 0.0:
            raise ValueError(f"gamma_c must be >= 0, got {self.gamma_c}")
        if not (0.0 < self.exchange_renorm <= 1.0):
            raise ValueError(
                f"exchange_renorm must be in (0, 1], got {self.exchange_renorm}"
            )

    @property
    def omega_ex_effective(self) -> float:
        """Exchange rate applied in the dynamics, rad/s."""
        return self.omega_ex * self.exchange_renorm


@dataclass(frozen=True)
class RegimeReport:
    """Boolean regime conditions and the resulting label."""

    knudsen_ok: bool  # gamma_c well below all trap frequencies
    isre_dominates_collisions: bool  # omega_ex / pi > gamma_c
    isre_dominates_inhomogeneity: bool  # omega_ex > delta0
    regime_label: Regime
    tight_ratio: float = field(default=10.0)  # omega_ex/delta0 threshold for TightSync


def thermal_velocity(p: AtomicParams) -> float:
    """1D thermal velocity sqrt(k_B T / m), m/s."""
    return math.sqrt(K_B * p.temperature / p.mass)


def exchange_rate(p: AtomicParams) -> float:
    """Exchange (identical spin rotation) rate, rad/s.

    The rate divided by 2 pi is 2 hbar |a01| nbar / m, linear in density.
    """
    return TWO_PI * 2.0 * HBAR * abs(p.scattering_length_a01) * p.density_nbar / p.mass


def lateral_collision_rate(p: AtomicParams) -> float:
    """Rate of lateral (energy-changing) elastic collisions, 1/s.

    gamma_c = (32 sqrt(pi) / 3) a01^2 nbar v_T.  The prefactor assumes the
    three s-wave lengths are approximately equal; no unequal-length variant
    is provided.
    """
    a01 = p.scattering_length_a01
    return (32.0 * math.sqrt(math.pi) / 3.0) * a01 * a01 * p.density_nbar * thermal_velocity(p)


def mean_field_shift(density_local: float) -> float:
    """Collisional mean-field shift of the transition frequency, rad/s.

    For an equal superposition of the two clock states the shift is
    -0.4 Hz per 1e18 m^-3 of local density.
    """
    if density_local < 0.0:
        raise ValueError(f"density must be >= 0, got {density_local}")
    return TWO_PI * (-0.4) * (density_local / 1.0e18)


def inhomogeneity_scale(
    density_nbar: float,
    base_hz: float = 1.2,
    slope_hz_per_unit_density: float = 0.1,
) -> float:
    """Density-linear model of the inhomogeneity scale delta0, rad/s.

    delta0 / 2 pi = base + slope * (nbar / 1e18 m^-3).  The defaults are the
    detuned-trap values of the second experiment configuration; the full
    spatial average over a measured field map is out of scope and delta0 is
    normally supplied directly.
    """
    return TWO_PI * (base_hz + slope_hz_per_unit_density * (density_nbar / 1.0e18))


def rates_from_atomic(
    p: AtomicParams,
    delta0: float,
    detuning: float = 0.0,
    exchange_renorm: float = 1.0,
) -> RateSet:
    """Bundle the derived exchange/collision rates with a given delta0."""
    return RateSet(
        delta0=delta0,
        omega_ex=exchange_rate(p),
        gamma_c=lateral_collision_rate(p),
        detuning=detuning,
        exchange_renorm=exchange_renorm,
    )


def classify_regime(
    r: RateSet,
    t: TrapParams,
    tight_ratio: float = 10.0,
    knudsen_factor: float = 0.1,
) -> RegimeReport:
    """Evaluate the self-rephasing conditions and label the regime.

    Self-rephasing requires the exchange torque to revert the spins both
    before lateral collisions reshuffle the energy classes
    (omega_ex / pi > gamma_c) and before the dephasing reaches pi
    (omega_ex > delta0).  When both hold, the label is TightSync if
    omega_ex >= tight_ratio * delta0, else LossAndRevival.  The Knudsen
    flag (gamma_c < knudsen_factor * min trap frequency) reports whether
    the energy-space description itself is valid; it does not change the
    label.
    """
    omega_ex = r.omega_ex_effective
    knudsen_ok = r.gamma_c < knudsen_factor * t.omega_min
    isre_vs_coll = omega_ex / math.pi > r.gamma_c
    isre_vs_inhom = omega_ex > abs(r.delta0)

    if isre_vs_coll and isre_vs_inhom:
        if omega_ex >= tight_ratio * abs(r.delta0):
            label = Regime.TIGHT_SYNC
        else:
            label = Regime.LOSS_AND_REVIVAL
    else:
        label = Regime.DEPHASING

    return RegimeReport(
        knudsen_ok=knudsen_ok,
        isre_dominates_collisions=isre_vs_coll,
        isre_dominates_inhomogeneity=isre_vs_inhom,
        regime_label=label,
        tight_ratio=tight_ratio,
    )
