# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled RK4 engine for the energy-space kinetic equation.

Same contract as ``_engine_py.evolve_rk4``; selected automatically by
``spinrephase.backend`` when the extension is importable.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport isfinite

cnp.import_array()


cdef void _deriv(double[:, ::1] s, double[::1] dpar, double[::1] w,
                 double[:, ::1] kw, bint has_kernel, double omega_ex,
                 double gamma_c, double[:, ::1] out, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double sb0 = 0.0, sb1 = 0.0, sb2 = 0.0
    cdef double m0, m1, m2, tx, ty, tz, wj
    for i in range(n):
        sb0 += w[i] * s[i, 0]
        sb1 += w[i] * s[i, 1]
        sb2 += w[i] * s[i, 2]
    for i in range(n):
        if has_kernel:
            m0 = 0.0
            m1 = 0.0
            m2 = 0.0
            for j in range(n):
                wj = kw[i, j]
                m0 += wj * s[j, 0]
                m1 += wj * s[j, 1]
                m2 += wj * s[j, 2]
        else:
            m0 = sb0
            m1 = sb1
            m2 = sb2
        tx = omega_ex * m0
        ty = omega_ex * m1
        tz = dpar[i] + omega_ex * m2
        out[i, 0] = ty * s[i, 2] - tz * s[i, 1] - gamma_c * (s[i, 0] - sb0)
        out[i, 1] = tz * s[i, 0] - tx * s[i, 2] - gamma_c * (s[i, 1] - sb1)
        out[i, 2] = tx * s[i, 1] - ty * s[i, 0] - gamma_c * (s[i, 2] - sb2)


def evolve_rk4(spins0, energies, weights, kmat, double delta0, double detuning,
               double omega_ex_eff, double gamma_c, double dt, long n_steps,
               long sample_every, bint record_fields):
    cdef double[:, ::1] s = np.array(spins0, dtype=float, order="C", copy=True)
    cdef Py_ssize_t n = s.shape[0]
    cdef double[::1] dpar = delta0 * np.ascontiguousarray(energies, dtype=float) + detuning
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=float)
    cdef bint has_kernel = kmat is not None
    cdef double[:, ::1] kw
    if has_kernel:
        kw = np.ascontiguousarray(kmat * np.asarray(weights, dtype=float)[None, :])
    else:
        kw = np.zeros((1, 1))

    cdef Py_ssize_t m_samples = n_steps // sample_every + 1
    if n_steps % sample_every != 0:
        m_samples += 1
    steps_arr = np.empty(m_samples, dtype=np.int64)
    sbar_arr = np.empty((m_samples, 3))
    fields_arr = np.empty((m_samples, n, 3)) if record_fields else None
    cdef cnp.int64_t[::1] steps_mv = steps_arr
    cdef double[:, ::1] sbar_mv = sbar_arr
    cdef double[:, :, ::1] fields_mv
    if record_fields:
        fields_mv = fields_arr
    else:
        fields_mv = np.zeros((1, 1, 3))

    cdef double[:, ::1] k1 = np.empty((n, 3))
    cdef double[:, ::1] k2 = np.empty((n, 3))
    cdef double[:, ::1] k3 = np.empty((n, 3))
    cdef double[:, ::1] k4 = np.empty((n, 3))
    cdef double[:, ::1] stage = np.empty((n, 3))

    cdef Py_ssize_t idx = 0
    cdef long step = 0
    cdef Py_ssize_t i, c
    cdef double half_h = 0.5 * dt
    cdef double sixth_h = dt / 6.0
    cdef bint ok = True

    with nogil:
        ok = _record(s, w, steps_mv, sbar_mv, fields_mv, record_fields, idx, 0, n)
        idx += 1
        if ok:
            for step in range(1, n_steps + 1):
                _deriv(s, dpar, w, kw, has_kernel, omega_ex_eff, gamma_c, k1, n)
                for i in range(n):
                    for c in range(3):
                        stage[i, c] = s[i, c] + half_h * k1[i, c]
                _deriv(stage, dpar, w, kw, has_kernel, omega_ex_eff, gamma_c, k2, n)
                for i in range(n):
                    for c in range(3):
                        stage[i, c] = s[i, c] + half_h * k2[i, c]
                _deriv(stage, dpar, w, kw, has_kernel, omega_ex_eff, gamma_c, k3, n)
                for i in range(n):
                    for c in range(3):
                        stage[i, c] = s[i, c] + dt * k3[i, c]
                _deriv(stage, dpar, w, kw, has_kernel, omega_ex_eff, gamma_c, k4, n)
                for i in range(n):
                    for c in range(3):
                        s[i, c] = s[i, c] + sixth_h * (
                            k1[i, c] + 2.0 * k2[i, c] + 2.0 * k3[i, c] + k4[i, c]
                        )
                if step % sample_every == 0 or step == n_steps:
                    ok = _record(s, w, steps_mv, sbar_mv, fields_mv,
                                 record_fields, idx, step, n)
                    idx += 1
                    if not ok:
                        break

    if ok:
        return steps_arr, sbar_arr, fields_arr, True
    return (
        steps_arr[:idx],
        sbar_arr[:idx],
        fields_arr[:idx] if record_fields else None,
        False,
    )


cdef bint _record(double[:, ::1] s, double[::1] w, cnp.int64_t[::1] steps,
                  double[:, ::1] sbar, double[:, :, ::1] fields,
                  bint record_fields, Py_ssize_t idx, long step,
                  Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, c
    cdef double sb0 = 0.0, sb1 = 0.0, sb2 = 0.0
    for i in range(n):
        sb0 += w[i] * s[i, 0]
        sb1 += w[i] * s[i, 1]
        sb2 += w[i] * s[i, 2]
    steps[idx] = step
    sbar[idx, 0] = sb0
    sbar[idx, 1] = sb1
    sbar[idx, 2] = sb2
    if record_fields:
        for i in range(n):
            for c in range(3):
                fields[idx, i, c] = s[i, c]
    return isfinite(sb0) and isfinite(sb1) and isfinite(sb2)
