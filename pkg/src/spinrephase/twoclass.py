"""Two-class toy model of exchange-driven rephasing.

The ensemble is reduced to two macroscopic spins with opposite precession
offsets +-delta/2 about u_par, coupled by the exchange torque that rotates
each spin around the pair mean:

    dS_f/dt = (+delta/2) u_par x S_f + (omega_ex/2) (M x S_f) - gamma_x (S_f - M)
    dS_s/dt = (-delta/2) u_par x S_s + (omega_ex/2) (M x S_s) - gamma_x (S_s - M)

with M = (S_f + S_s)/2.  The factor omega_ex/2 on the mean makes the
difference vector rotate around the sum at omega_ex/2 per unit |M|, so the
two transverse polarizations are swapped (phase spread reversed) after a
time pi/omega_ex of aligned spins, and a dephase/rephase cycle closes
after about 2 pi/omega_ex.  The model is exactly a two-node discretization
of the full kinetic equation (equal weights, per-node offsets +-delta/2,
exchange rate omega_ex/2) and doubles as a brute-force cross-check of the
solver.  gamma_x mimics lateral collisions as relaxation toward the mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kinetic import ContrastCurve, RK4_STABILITY_MARGIN, UnstableStepError
from .rates import RateSet


@dataclass(frozen=True)
class TwoClassState:
    """Two macroscopic class spins and their coupling rates."""

    s_fast: np.ndarray  # (3,)
    s_slow: np.ndarray  # (3,)
    delta_split: float  # rad/s, precession-rate difference between classes
    omega_ex: float  # rad/s
    gamma_x: float = 0.0  # 1/s, class-exchange relaxation

    def __post_init__(self) -> None:
        for name in ("s_fast", "s_slow"):
            v = np.ascontiguousarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, v)
            if v.shape != (3,):
                raise ValueError(f"{name} must have shape (3,)")
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be finite")
            if np.linalg.norm(v) > 1.0 + 1e-9:
                raise ValueError(f"|{name}| must be <= 1")
        if not (math.isfinite(self.delta_split) and math.isfinite(self.omega_ex)):
            raise ValueError("delta_split and omega_ex must be finite")
        if self.gamma_x < 0.0:
            raise ValueError(f"gamma_x must be >= 0, got {self.gamma_x}")


def _deriv(state: np.ndarray, delta: float, wex: float, gx: float) -> np.ndarray:
    mean = 0.5 * (state[0] + state[1])
    tx = 0.5 * wex * mean[0]
    ty = 0.5 * wex * mean[1]
    out = np.empty_like(state)
    for k, sign in ((0, +1.0), (1, -1.0)):
        s = state[k]
        tz = sign * 0.5 * delta + 0.5 * wex * mean[2]
        out[k, 0] = ty * s[2] - tz * s[1] - gx * (s[0] - mean[0])
        out[k, 1] = tz * s[0] - tx * s[2] - gx * (s[1] - mean[1])
        out[k, 2] = tx * s[1] - ty * s[0] - gx * (s[2] - mean[2])
    return out


def evolve_two_class(
    init: TwoClassState, t_final: float, dt: float, sample_every: int = 1
) -> ContrastCurve:
    """Fixed-step RK4 integration of the two-class model.

    Returns the pair-mean trajectory; contrast is |M_perp|.
    """
    if not (t_final > 0.0 and math.isfinite(t_final)):
        raise ValueError(f"t_final must be > 0, got {t_final}")
    if not (dt > 0.0 and math.isfinite(dt)):
        raise ValueError(f"dt must be > 0, got {dt}")
    if sample_every < 1:
        raise ValueError(f"sample_every must be >= 1, got {sample_every}")
    rate_scale = 0.5 * abs(init.delta_split) + 0.5 * abs(init.omega_ex) + init.gamma_x
    if rate_scale > 0.0 and dt > RK4_STABILITY_MARGIN / rate_scale:
        raise UnstableStepError(
            f"dt = {dt:g} s exceeds the RK4 stability limit "
            f"{RK4_STABILITY_MARGIN / rate_scale:g} s for these rates"
        )
    n_steps = int(round(t_final / dt))
    if n_steps < 1:
        raise ValueError(f"t_final = {t_final:g} s is shorter than one step")

    state = np.stack([init.s_fast, init.s_slow]).astype(float)
    delta, wex, gx = init.delta_split, init.omega_ex, init.gamma_x

    sample_steps = [0]
    means = [0.5 * (state[0] + state[1])]
    for step in range(1, n_steps + 1):
        k1 = _deriv(state, delta, wex, gx)
        k2 = _deriv(state + (0.5 * dt) * k1, delta, wex, gx)
        k3 = _deriv(state + (0.5 * dt) * k2, delta, wex, gx)
        k4 = _deriv(state + dt * k3, delta, wex, gx)
        state += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step % sample_every == 0 or step == n_steps:
            sample_steps.append(step)
            means.append(0.5 * (state[0] + state[1]))
    times = np.asarray(sample_steps, dtype=float) * dt
    return ContrastCurve.from_sbar(times, np.asarray(means))


def two_class_revival_estimate(rates: RateSet) -> float:
    """Full exchange period 2 pi / omega_ex, s: the first-revival estimate."""
    wex = rates.omega_ex_effective
    if wex <= 0.0:
        raise ValueError(f"omega_ex must be > 0, got {rates.omega_ex}")
    return 2.0 * math.pi / wex


def two_class_rephasing_estimate(rates: RateSet) -> float:
    """Half period pi / omega_ex, s: the phase-spread reversal timescale."""
    wex = rates.omega_ex_effective
    if wex <= 0.0:
        raise ValueError(f"omega_ex must be > 0, got {rates.omega_ex}")
    return math.pi / wex
