"""Energy-space kinetic equation for the ensemble spin density.

State: one Bloch vector S(E_i) per energy node of an :class:`EnergyGrid`,
components on the frame {u_perp1, u_perp2, u_par} (indices 0, 1, 2).  The
equation of motion integrated here is

    dS(E)/dt = -gamma_c [S(E) - Sbar]
               + [ (delta0 E + delta_R) u_par
                   + omega_ex_eff * M(E) ] x S(E)

where Sbar = sum_i w_i S(E_i) is the ensemble-average spin,
M(E_i) = sum_j w_j K(E_i, E_j) S(E_j) is the exchange mean field seen at
energy E_i, and omega_ex_eff = omega_ex * exchange_renorm.  For the
infinite-range kernel K = 1, M(E) = Sbar for every node.  The detuning
delta_R enters as a uniform addition to the longitudinal precession rate
(rotating-frame convention); the unforced model has delta_R = 0.

Atom loss is deliberately absent from the dynamics; it is handled only as
a data-analysis fit.  No spin renormalization is performed during
integration: norm drift is a measured error signal of the integrator, not
hidden.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .backend import BACKEND, evolve_rk4
from .grid import EnergyGrid, GridScheme, average
from .rates import RateSet

# Component indices of the Bloch frame.
PERP1, PERP2, PAR = 0, 1, 2

# RK4's linear stability region covers |omega dt| <= 2 sqrt(2) on the
# imaginary axis (pure precession); keep a small margin below it.
RK4_STABILITY_MARGIN = 2.8


class NumericsError(RuntimeError):
    """A numerical failure (unstable step, non-finite state, failed fit)."""


class UnstableStepError(NumericsError):
    pass


class NonFiniteStateError(NumericsError):
    pass


def u_perp1() -> np.ndarray:
    return np.array([1.0, 0.0, 0.0])


def u_perp2() -> np.ndarray:
    return np.array([0.0, 1.0, 0.0])


def u_par() -> np.ndarray:
    return np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class SpinField:
    """Spin density on an energy grid: one Bloch vector per node."""

    spins: np.ndarray  # (n, 3)
    time: float = 0.0

    def __post_init__(self) -> None:
        spins = np.ascontiguousarray(self.spins, dtype=float)
        object.__setattr__(self, "spins", spins)
        if spins.ndim != 2 or spins.shape[1] != 3 or spins.shape[0] < 1:
            raise ValueError(f"spins must have shape (n, 3), got {spins.shape}")
        if not np.all(np.isfinite(spins)):
            raise ValueError("spin components must be finite")
        if not math.isfinite(self.time):
            raise ValueError("time must be finite")

    def __len__(self) -> int:
        return self.spins.shape[0]

    @classmethod
    def uniform(cls, n: int, vector: np.ndarray, time: float = 0.0) -> "SpinField":
        """All nodes aligned with ``vector``."""
        v = np.asarray(vector, dtype=float)
        if v.shape != (3,):
            raise ValueError("vector must have shape (3,)")
        return cls(np.tile(v, (n, 1)), time)

    @classmethod
    def initial_transverse(cls, n: int) -> "SpinField":
        """S(E, 0) = u_perp1: the state right after an ideal pi/2 pulse."""
        return cls.uniform(n, u_perp1())

    @classmethod
    def initial_ground(cls, n: int) -> "SpinField":
        """S(E, 0) = -u_par: every atom in the lower clock state."""
        return cls.uniform(n, -u_par())


class KernelKind(enum.Enum):
    INFINITE_RANGE = "infinite-range"
    ONE_D = "one-d"
    MATRIX = "matrix"


@dataclass(frozen=True)
class KernelSpec:
    """Exchange coupling kernel K(E, E') in energy space.

    The mean field is local in position but becomes long-ranged in energy
    after orbit averaging.  INFINITE_RANGE approximates K = 1 (used for
    all quantitative runs); ONE_D is the quasi-1D form
    [max(E, E') |E - E'|]^(-1/4) with its integrable diagonal singularity
    clamped at ``regularization_epsilon``; MATRIX takes an explicit dense
    symmetric matrix.
    """

    kind: KernelKind = KernelKind.INFINITE_RANGE
    matrix: np.ndarray | None = None
    regularization_epsilon: float = 1e-6

    def __post_init__(self) -> None:
        if self.regularization_epsilon <= 0.0:
            raise ValueError("regularization_epsilon must be > 0")
        if self.kind is KernelKind.MATRIX:
            if self.matrix is None:
                raise ValueError("MATRIX kernel requires a matrix")
            m = np.ascontiguousarray(self.matrix, dtype=float)
            object.__setattr__(self, "matrix", m)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError(f"kernel matrix must be square, got {m.shape}")
            if not np.all(np.isfinite(m)):
                raise ValueError("kernel matrix must be finite")
            if np.any(m < 0.0):
                raise ValueError("kernel matrix entries must be >= 0")
            if np.max(np.abs(m - m.T)) > 1e-12:
                raise ValueError("kernel matrix must be symmetric within 1e-12")
        elif self.matrix is not None:
            raise ValueError(f"{self.kind} kernel does not take a matrix")

    @classmethod
    def infinite_range(cls) -> "KernelSpec":
        return cls(KernelKind.INFINITE_RANGE)

    @classmethod
    def one_d(cls, regularization_epsilon: float = 1e-6) -> "KernelSpec":
        return cls(KernelKind.ONE_D, regularization_epsilon=regularization_epsilon)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "KernelSpec":
        return cls(KernelKind.MATRIX, matrix=matrix)


def build_kernel_matrix(grid: EnergyGrid, spec: KernelSpec) -> np.ndarray:
    """Dense K(E_i, E_j) for the given grid."""
    n = len(grid)
    if spec.kind is KernelKind.INFINITE_RANGE:
        return np.ones((n, n))
    if spec.kind is KernelKind.MATRIX:
        if spec.matrix.shape != (n, n):
            raise ValueError(
                f"kernel matrix shape {spec.matrix.shape} does not match grid ({n})"
            )
        return spec.matrix
    e = grid.nodes
    emax = np.maximum.outer(e, e)
    gap = np.maximum(np.abs(np.subtract.outer(e, e)), spec.regularization_epsilon)
    return (emax * gap) ** (-0.25)


@dataclass(frozen=True)
class ContrastCurve:
    """Time series of the ensemble-average spin and derived contrast.

    ``contrast`` is the transverse magnitude |Sbar_perp| (the Ramsey
    fringe amplitude); ``contrast_total`` is the full magnitude |Sbar|.
    ``fields`` optionally holds the per-node spins at the sample times,
    shape (m, n, 3), when the producer recorded them.
    """

    times: np.ndarray  # (m,) seconds
    sbar: np.ndarray  # (m, 3)
    contrast: np.ndarray  # (m,)
    contrast_total: np.ndarray  # (m,)
    fields: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        sbar = np.asarray(self.sbar, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "sbar", sbar)
        if times.ndim != 1 or sbar.shape != (times.size, 3):
            raise ValueError("times (m,) and sbar (m, 3) shapes are inconsistent")
        if times.size >= 2 and np.any(np.diff(times) <= 0.0):
            raise ValueError("times must be strictly increasing")

    @classmethod
    def from_sbar(
        cls, times: np.ndarray, sbar: np.ndarray, fields: np.ndarray | None = None
    ) -> "ContrastCurve":
        sbar = np.asarray(sbar, dtype=float)
        contrast = np.hypot(sbar[:, PERP1], sbar[:, PERP2])
        total = np.hypot(contrast, sbar[:, PAR])
        return cls(np.asarray(times, dtype=float), sbar, contrast, total, fields)

    def __len__(self) -> int:
        return self.times.size

    def write_csv(self, path) -> None:
        """Trajectory CSV: full double precision, one row per sample."""
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("t,sbar_perp1,sbar_perp2,sbar_par,contrast,contrast_total\n")
            for k in range(len(self)):
                row = (
                    self.times[k],
                    self.sbar[k, PERP1],
                    self.sbar[k, PERP2],
                    self.sbar[k, PAR],
                    self.contrast[k],
                    self.contrast_total[k],
                )
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def analytic_contrast(delta0: float, t) -> np.ndarray | float:
    """Closed-form contrast without interactions.

    With omega_ex = gamma_c = 0 and S(E, 0) = u_perp1, averaging the
    freely precessing spins over the energy distribution gives
    |Sbar(t)| = (1 + (delta0 t)^2)^(-3/2).
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("t must be >= 0")
    out = (1.0 + (delta0 * t) ** 2) ** (-1.5)
    return out if out.ndim else float(out)


def _kernel_matrix_for_evolve(
    grid: EnergyGrid, kernel: KernelSpec
) -> np.ndarray | None:
    """Dense kernel for the engine, or None for the fast K = 1 path."""
    if kernel.kind is KernelKind.INFINITE_RANGE:
        return None
    if kernel.kind is KernelKind.ONE_D and grid.scheme is not GridScheme.UNIFORM_TRUNCATED:
        raise ValueError("the one-d kernel is only supported on uniform grids")
    return np.ascontiguousarray(build_kernel_matrix(grid, kernel))


def exchange_gain(grid: EnergyGrid, kernel: KernelSpec) -> float:
    """Largest weighted kernel row sum max_i sum_j w_j K(E_i, E_j).

    Bounds the exchange torque per unit spin; 1 for the K = 1 kernel.
    """
    kmat = _kernel_matrix_for_evolve(grid, kernel)
    if kmat is None:
        return 1.0
    return float(np.max(kmat @ grid.weights))


def max_stable_dt(grid: EnergyGrid, rates: RateSet, kernel: KernelSpec) -> float:
    """Largest fixed RK4 step accepted by :func:`evolve`.

    The fastest local precession rate is bounded by
    |delta0| E_max + |delta_R| + omega_ex_eff * gain + gamma_c; the step
    must keep it inside RK4's stability interval.  Accuracy is a separate
    concern, checked by step-halving rather than enforced here.
    """
    rate_scale = (
        abs(rates.delta0) * grid.e_max
        + abs(rates.detuning)
        + abs(rates.omega_ex_effective) * exchange_gain(grid, kernel)
        + rates.gamma_c
    )
    if rate_scale == 0.0:
        return math.inf
    return RK4_STABILITY_MARGIN / rate_scale


def rhs(
    field: SpinField,
    grid: EnergyGrid,
    rates: RateSet,
    kernel: KernelSpec = KernelSpec.infinite_range(),
) -> np.ndarray:
    """Time derivative of the spin field, shape (n, 3).

    Reference implementation of the equation in the module docstring; the
    integration engines fuse the same arithmetic into the RK4 loop.
    """
    if len(field) != len(grid):
        raise ValueError(
            f"field length {len(field)} does not match grid length {len(grid)}"
        )
    s = field.spins
    if not np.all(np.isfinite(s)):
        raise ValueError("spin field must be finite")
    sbar = average(grid, s)
    kmat = _kernel_matrix_for_evolve(grid, kernel)
    wex = rates.omega_ex_effective
    if kmat is None:
        m = np.broadcast_to(sbar, s.shape)
    else:
        m = (kmat * grid.weights) @ s
    tx = wex * m[..., PERP1]
    ty = wex * m[..., PERP2]
    tz = rates.delta0 * grid.nodes + rates.detuning + wex * m[..., PAR]
    out = np.empty_like(s)
    out[:, PERP1] = ty * s[:, PAR] - tz * s[:, PERP2] - rates.gamma_c * (s[:, PERP1] - sbar[PERP1])
    out[:, PERP2] = tz * s[:, PERP1] - tx * s[:, PAR] - rates.gamma_c * (s[:, PERP2] - sbar[PERP2])
    out[:, PAR] = tx * s[:, PERP2] - ty * s[:, PERP1] - rates.gamma_c * (s[:, PAR] - sbar[PAR])
    return out


def evolve(
    initial: SpinField,
    grid: EnergyGrid,
    rates: RateSet,
    kernel: KernelSpec = KernelSpec.infinite_range(),
    t_final: float = 1.0,
    dt: float = 1e-3,
    sample_every: int = 1,
    record_fields: bool = False,
) -> ContrastCurve:
    """Integrate the kinetic equation with fixed-step classical RK4.

    Samples the ensemble average every ``sample_every`` steps (the final
    step is always included).  Deterministic: identical inputs produce
    bit-identical output on a given backend.  Raises
    :class:`UnstableStepError` if ``dt`` exceeds :func:`max_stable_dt` and
    :class:`NonFiniteStateError` if the state leaves the representable
    range during integration.
    """
    if len(initial) != len(grid):
        raise ValueError(
            f"initial field length {len(initial)} does not match grid ({len(grid)})"
        )
    if not (t_final > 0.0 and math.isfinite(t_final)):
        raise ValueError(f"t_final must be > 0, got {t_final}")
    if not (dt > 0.0 and math.isfinite(dt)):
        raise ValueError(f"dt must be > 0, got {dt}")
    if sample_every < 1:
        raise ValueError(f"sample_every must be >= 1, got {sample_every}")
    dt_max = max_stable_dt(grid, rates, kernel)
    if dt > dt_max:
        raise UnstableStepError(
            f"dt = {dt:g} s exceeds the RK4 stability limit {dt_max:g} s for "
            f"these rates on this grid (fastest node precession too fast)"
        )
    n_steps = int(round(t_final / dt))
    if n_steps < 1:
        raise ValueError(f"t_final = {t_final:g} s is shorter than one step")

    kmat = _kernel_matrix_for_evolve(grid, kernel)
    steps, sbar, fields, ok = evolve_rk4(
        initial.spins,
        grid.nodes,
        grid.weights,
        kmat,
        rates.delta0,
        rates.detuning,
        rates.omega_ex_effective,
        rates.gamma_c,
        dt,
        n_steps,
        int(sample_every),
        bool(record_fields),
    )
    if not ok:
        t_bad = initial.time + steps[-1] * dt
        raise NonFiniteStateError(
            f"non-finite ensemble average at t = {t_bad:g} s (step {steps[-1]})"
        )
    times = initial.time + steps * dt
    return ContrastCurve.from_sbar(times, sbar, fields if record_fields else None)


__all__ = [
    "PERP1",
    "PERP2",
    "PAR",
    "BACKEND",
    "NumericsError",
    "UnstableStepError",
    "NonFiniteStateError",
    "SpinField",
    "KernelKind",
    "KernelSpec",
    "ContrastCurve",
    "u_perp1",
    "u_perp2",
    "u_par",
    "build_kernel_matrix",
    "analytic_contrast",
    "exchange_gain",
    "max_stable_dt",
    "rhs",
    "evolve",
]
