"""Ramsey protocol on top of the kinetic solver, and the analysis fits.

Conventions (fixed once, everything else follows): the lower clock state
|0> is -u_par, the upper state |1> is +u_par, pi/2 pulses rotate about
u_perp2 with the sign that takes |0> to +u_perp1, and the transition
probability is P = (1 + Sbar_par)/2.  With these choices the resonant
Ramsey sequence with no spin dynamics gives P = 1, and the fringe
amplitude of P(delta_R) equals the transverse coherence |Sbar_perp(T_R)|.

Pulses are instantaneous ideal rotations: the drive Rabi rates far exceed
every spin-dynamics rate, so pulse-duration effects are ignored.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import curve_fit

from .constants import TWO_PI
from .grid import EnergyGrid, average
from .kinetic import (
    PAR,
    PERP1,
    PERP2,
    ContrastCurve,
    KernelSpec,
    NumericsError,
    SpinField,
    evolve,
)
from .rates import RateSet


class FitError(NumericsError):
    """A curve fit failed or its preconditions were not met."""


class NoRevivalError(FitError):
    """No contrast revival in the curve: the ensemble is simply dephasing."""


@dataclass(frozen=True)
class RamseyConfig:
    """Parameters of one Ramsey measurement and of the detuning scan."""

    ramsey_time_tr: float  # s, free-evolution time between the pulses
    detuning_dr: float = TWO_PI * 3.6  # rad/s, two-photon detuning
    pulse_model: str = "instantaneous"  # only option
    n_detuning_steps: int = 30
    detuning_span_periods: float = 2.0  # fringe periods covered by the scan

    def __post_init__(self) -> None:
        if not (self.ramsey_time_tr > 0.0 and math.isfinite(self.ramsey_time_tr)):
            raise ValueError(f"ramsey_time_tr must be > 0, got {self.ramsey_time_tr}")
        if self.pulse_model != "instantaneous":
            raise ValueError(f"unsupported pulse model {self.pulse_model!r}")
        if self.n_detuning_steps < 5:
            raise ValueError(
                f"n_detuning_steps must be >= 5, got {self.n_detuning_steps}"
            )
        if self.detuning_span_periods < 1.5:
            raise ValueError(
                "detuning_span_periods must be >= 1.5 (fringe fit would be degenerate)"
            )


@dataclass(frozen=True)
class FringeScan:
    """One detuning scan at fixed T_R and its fitted fringe."""

    detunings: np.ndarray  # rad/s
    probabilities: np.ndarray  # transition probabilities, in [0, 1]
    fitted_contrast: float
    fitted_phase: float  # rad

    def __post_init__(self) -> None:
        if not (-1e-9 <= self.fitted_contrast <= 1.0 + 1e-6):
            raise ValueError(
                f"fitted contrast {self.fitted_contrast} outside [0, 1]"
            )


@dataclass(frozen=True)
class DecayFit:
    amplitude: float
    tau: float  # s, 1/e time
    residual_rms: float

    def __post_init__(self) -> None:
        if not (self.tau > 0.0):
            raise ValueError(f"tau must be > 0, got {self.tau}")


@dataclass(frozen=True)
class AtomNumberFit:
    n_total: float  # fitted atom number at t = 0
    tau: float  # s, decay time of the upper-state population
    residual_rms: float


def apply_pulse(field: SpinField, angle: float, axis: str) -> SpinField:
    """Rotate every spin by ``angle`` about a transverse axis.

    ``axis`` is ``"u_perp1"`` or ``"u_perp2"``.  The rotation sense is
    fixed so that (pi/2, u_perp2) maps -u_par to +u_perp1.  Exact
    orthogonal map: norms are preserved to rounding.
    """
    c, s = math.cos(angle), math.sin(angle)
    if axis == "u_perp2":
        rot = np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])
    elif axis == "u_perp1":
        rot = np.array([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]])
    else:
        raise ValueError(f"axis must be 'u_perp1' or 'u_perp2', got {axis!r}")
    return SpinField(field.spins @ rot.T, field.time)


def ramsey_sequence(
    grid: EnergyGrid,
    rates: RateSet,
    kernel: KernelSpec,
    cfg: RamseyConfig,
    dt: float = 5e-4,
) -> float:
    """Transition probability of one Ramsey cycle.

    pi/2 pulse on |0>, free evolution for T_R at the detuning of ``cfg``
    (overriding ``rates.detuning``), second pi/2 pulse, then
    P = (1 + Sbar_par)/2.
    """
    run_rates = replace(rates, detuning=cfg.detuning_dr)
    field = SpinField.initial_ground(len(grid))
    field = apply_pulse(field, math.pi / 2.0, "u_perp2")
    n_steps = max(1, int(round(cfg.ramsey_time_tr / dt)))
    curve = evolve(
        field,
        grid,
        run_rates,
        kernel,
        t_final=cfg.ramsey_time_tr,
        dt=dt,
        sample_every=n_steps,
        record_fields=True,
    )
    final = SpinField(curve.fields[-1], float(curve.times[-1]))
    final = apply_pulse(final, math.pi / 2.0, "u_perp2")
    sbar = average(grid, final.spins)
    return float(0.5 * (1.0 + sbar[PAR]))


def scan_detunings(cfg: RamseyConfig) -> np.ndarray:
    """Detunings of the fringe scan, rad/s: centered on cfg.detuning_dr,
    covering ``detuning_span_periods`` fringe periods."""
    period = TWO_PI / cfg.ramsey_time_tr
    offsets = np.linspace(-0.5, 0.5, cfg.n_detuning_steps) * (
        cfg.detuning_span_periods * period
    )
    return cfg.detuning_dr + offsets


def fit_fringe(
    detunings: np.ndarray, probabilities: np.ndarray, ramsey_time: float
) -> tuple[float, float]:
    """Fit P(delta) = (1 + C cos(delta T_R + phi))/2 at known T_R.

    Linear least squares in (C cos phi, C sin phi); returns (C, phi) with
    C >= 0.  Raises :class:`FitError` on a degenerate design (detuning
    span too narrow).
    """
    delta = np.asarray(detunings, dtype=float)
    y = 2.0 * np.asarray(probabilities, dtype=float) - 1.0
    phase = delta * ramsey_time
    design = np.column_stack([np.cos(phase), -np.sin(phase)])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < 2:
        raise FitError("degenerate fringe design matrix: detuning span too narrow")
    a, b = coef
    return float(math.hypot(a, b)), float(math.atan2(b, a))


def fringe_scan(
    grid: EnergyGrid,
    rates: RateSet,
    kernel: KernelSpec,
    cfg: RamseyConfig,
    dt: float = 5e-4,
) -> FringeScan:
    """Run one Ramsey sequence per detuning and fit the fringe."""
    detunings = scan_detunings(cfg)
    probs = np.array(
        [
            ramsey_sequence(grid, rates, kernel, replace(cfg, detuning_dr=d), dt)
            for d in detunings
        ]
    )
    contrast, phase = fit_fringe(detunings, probs, cfg.ramsey_time_tr)
    return FringeScan(detunings, probs, contrast, phase)


def contrast_vs_time(
    grid: EnergyGrid,
    rates: RateSet,
    kernel: KernelSpec,
    tr_list,
    cfg: RamseyConfig,
    dt: float = 5e-4,
) -> ContrastCurve:
    """Fringe contrast versus Ramsey time, normalized at the first T_R.

    One full detuning scan per entry of ``tr_list``.  The returned curve
    stores the fitted (co-rotating frame) transverse vector scaled by the
    first point's contrast, so its ``contrast`` column is the normalized
    fringe contrast.
    """
    tr = np.asarray(tr_list, dtype=float)
    if tr.size == 0:
        raise ValueError("tr_list must be nonempty")
    if np.any(tr <= 0.0) or np.any(np.diff(tr) <= 0.0):
        raise ValueError("tr_list must be positive and strictly increasing")
    sbar = np.zeros((tr.size, 3))
    for k, t_r in enumerate(tr):
        scan = fringe_scan(grid, rates, kernel, replace(cfg, ramsey_time_tr=float(t_r)), dt)
        sbar[k, PERP1] = scan.fitted_contrast * math.cos(scan.fitted_phase)
        sbar[k, PERP2] = scan.fitted_contrast * math.sin(scan.fitted_phase)
    c0 = math.hypot(sbar[0, PERP1], sbar[0, PERP2])
    if c0 <= 0.0:
        raise FitError("contrast at the first Ramsey time is zero: cannot normalize")
    return ContrastCurve.from_sbar(tr, sbar / c0)


def fit_exponential_decay(times, values) -> DecayFit:
    """Least-squares fit of A exp(-t/tau).

    Closed-form linear fit of the log-residuals, then a few Gauss-Newton
    iterations on the plain residuals (a no-op on noiseless data; the log
    fit is kept if the refinement does not improve).  Raises
    :class:`FitError` on non-positive values or non-decaying data.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != v.shape or t.size < 2:
        raise FitError("need at least 2 (time, value) samples")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
        raise FitError("times and values must be finite")
    if np.any(v <= 0.0):
        raise FitError("values must be > 0 for an exponential-decay fit")

    design = np.column_stack([np.ones_like(t), t])
    coef, _, rank, _ = np.linalg.lstsq(design, np.log(v), rcond=None)
    if rank < 2:
        raise FitError("degenerate design: need at least two distinct times")
    log_a, slope = coef
    if slope >= 0.0:
        raise FitError("data do not decay: fitted 1/e time would be infinite")
    amp, tau = math.exp(log_a), -1.0 / slope

    def ssr(a: float, ta: float) -> float:
        return float(np.sum((a * np.exp(-t / ta) - v) ** 2))

    best = (amp, tau, ssr(amp, tau))
    a, ta = amp, tau
    for _ in range(50):
        model = a * np.exp(-t / ta)
        r = model - v
        jac = np.column_stack([model / a, model * t / ta**2])
        try:
            step, _, _, _ = np.linalg.lstsq(jac, -r, rcond=None)
        except np.linalg.LinAlgError:
            break
        a_new, ta_new = a + step[0], ta + step[1]
        if not (ta_new > 0.0 and math.isfinite(a_new) and math.isfinite(ta_new)):
            break
        a, ta = a_new, ta_new
        cur = ssr(a, ta)
        if cur <= best[2]:
            best = (a, ta, cur)
        if max(abs(step[0]) / max(abs(a), 1e-300), abs(step[1]) / ta) < 1e-13:
            break
    amp, tau, ssq = best
    return DecayFit(amp, tau, math.sqrt(ssq / t.size))


def fit_atom_number(times, totals) -> AtomNumberFit:
    """Fit N(t) = N_T/2 (1 + exp(-t/tau)) to total detected atom numbers.

    The model starts at N_T, decays to N_T/2: the upper clock state is
    lost faster than the lower one, so the detected total depends on how
    long the ensemble spent in superposition.
    """
    t = np.asarray(times, dtype=float)
    n = np.asarray(totals, dtype=float)
    if t.ndim != 1 or t.shape != n.shape or t.size < 3:
        raise FitError("need at least 3 (time, total) samples")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(n))):
        raise FitError("times and totals must be finite")

    def model(tt, n_total, tau):
        return 0.5 * n_total * (1.0 + np.exp(-tt / tau))

    span = float(t.max() - t.min())
    p0 = (float(n.max()), max(span / 2.0, 1e-6))
    try:
        popt, _ = curve_fit(model, t, n, p0=p0, maxfev=10000)
    except RuntimeError as exc:
        raise FitError(f"atom-number fit did not converge: {exc}") from exc
    n_total, tau = float(popt[0]), float(popt[1])
    rms = math.sqrt(float(np.mean((model(t, n_total, tau) - n) ** 2)))
    return AtomNumberFit(n_total, tau, rms)


def fit_revival_time(curve: ContrastCurve) -> float:
    """Time of the first contrast revival, s.

    Finds the first local minimum of the contrast and the first local
    maximum after it, refined by 3-point parabolic interpolation.  Raises
    :class:`NoRevivalError` on a curve with no such structure (monotone
    decay: the dephasing regime).
    """
    c = curve.contrast
    t = curve.times
    if len(curve) < 3:
        raise NoRevivalError("curve too short to contain a revival")
    i_min = None
    for k in range(1, c.size - 1):
        if c[k] < c[k - 1] and c[k] <= c[k + 1]:
            i_min = k
            break
    if i_min is None:
        raise NoRevivalError("no local contrast minimum: monotone decay")
    i_max = None
    for k in range(i_min + 1, c.size - 1):
        if c[k] > c[k - 1] and c[k] >= c[k + 1]:
            i_max = k
            break
    if i_max is None:
        raise NoRevivalError("no contrast maximum after the first minimum")
    denom = c[i_max - 1] - 2.0 * c[i_max] + c[i_max + 1]
    if denom >= 0.0:
        return float(t[i_max])
    h = 0.5 * (t[i_max + 1] - t[i_max - 1])
    return float(t[i_max] + 0.5 * h * (c[i_max - 1] - c[i_max + 1]) / denom)


def read_xy_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column data file ``t_or_detuning,value`` with one header line.

    Parse failures report the offending line number.
    """
    xs: list[float] = []
    ys: list[float] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if lineno == 1:
                if len(row) != 2:
                    raise ValueError(
                        f"{path}:1: expected a two-column header, got {len(row)} columns"
                    )
                continue
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                xs.append(float(row[0]))
                ys.append(float(row[1]))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return np.asarray(xs), np.asarray(ys)
