"""Pure-numpy RK4 engine; the fallback when the compiled extension is absent.

Same contract as ``_engine_cy.evolve_rk4``.  Returns
``(steps, sbar, fields, ok)`` where ``steps`` (int64) are the step indices
of the samples, ``sbar`` the ensemble averages, ``fields`` the per-node
spins when requested, and ``ok`` is False if a non-finite average was
sampled (arrays are then truncated at the offending sample).
"""

from __future__ import annotations

import numpy as np


def evolve_rk4(
    spins0: np.ndarray,
    energies: np.ndarray,
    weights: np.ndarray,
    kmat: np.ndarray | None,
    delta0: float,
    detuning: float,
    omega_ex_eff: float,
    gamma_c: float,
    dt: float,
    n_steps: int,
    sample_every: int,
    record_fields: bool,
):
    s = np.array(spins0, dtype=float, order="C", copy=True)
    n = s.shape[0]
    dpar = delta0 * np.asarray(energies, dtype=float) + detuning
    kw = None if kmat is None else kmat * np.asarray(weights, dtype=float)[None, :]
    w = np.asarray(weights, dtype=float)

    def deriv(state: np.ndarray) -> np.ndarray:
        sbar = w @ state
        if kw is None:
            tx = omega_ex_eff * sbar[0]
            ty = omega_ex_eff * sbar[1]
            tz = dpar + omega_ex_eff * sbar[2]
        else:
            m = kw @ state
            tx = omega_ex_eff * m[:, 0]
            ty = omega_ex_eff * m[:, 1]
            tz = dpar + omega_ex_eff * m[:, 2]
        out = np.empty_like(state)
        out[:, 0] = ty * state[:, 2] - tz * state[:, 1] - gamma_c * (state[:, 0] - sbar[0])
        out[:, 1] = tz * state[:, 0] - tx * state[:, 2] - gamma_c * (state[:, 1] - sbar[1])
        out[:, 2] = tx * state[:, 1] - ty * state[:, 0] - gamma_c * (state[:, 2] - sbar[2])
        return out

    m_samples = n_steps // sample_every + 1 + (1 if n_steps % sample_every else 0)
    steps = np.empty(m_samples, dtype=np.int64)
    sbar_out = np.empty((m_samples, 3))
    fields_out = np.empty((m_samples, n, 3)) if record_fields else None
    idx = 0

    def record(step: int) -> bool:
        nonlocal idx
        steps[idx] = step
        sbar_out[idx] = w @ s
        if record_fields:
            fields_out[idx] = s
        idx += 1
        return bool(np.isfinite(sbar_out[idx - 1]).all())

    def result(ok: bool):
        return (
            steps[:idx],
            sbar_out[:idx],
            fields_out[:idx] if record_fields else None,
            ok,
        )

    if not record(0):
        return result(False)
    h = dt
    # overflow to inf IS the non-finite detection signal; no warning needed
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, n_steps + 1):
            k1 = deriv(s)
            k2 = deriv(s + (0.5 * h) * k1)
            k3 = deriv(s + (0.5 * h) * k2)
            k4 = deriv(s + h * k3)
            s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if step % sample_every == 0 or step == n_steps:
                if not record(step):
                    return result(False)
    return result(True)
