# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled propagation kernels.

Hot loop of the package: adaptive Dormand-Prince 5(4) (FSAL) and fixed
RK4 stepping of the Lindblad generator

    drho/dt = G rho + rho G^dag + sum_i C_i rho C_i^dag.

Matrix products go through BLAS zgemm; stage combinations, error norms
and the step controller run as plain C loops, which is where the pure
numpy fallback loses time at the small matrix sizes used here.  The
algorithm must stay in lockstep with ``_purepy.py``.
"""

import numpy as np

cimport cython
from libc.math cimport fabs, pow, sqrt
from scipy.linalg.cython_blas cimport zgemm

from .errors import NumericalError

BACKEND_NAME = "compiled"

cdef double SAFETY = 0.9
cdef double FAC_MIN = 0.2
cdef double FAC_MAX = 5.0
cdef long MAX_STEPS = 200_000_000
cdef double EPS16 = 16.0 * 2.220446049250313e-16


cdef inline void _gemm_nn(int d, double complex alpha, double complex* a,
                          double complex* b, double complex beta,
                          double complex* c) noexcept nogil:
    # row-major c = alpha a@b + beta c
    zgemm(b'N', b'N', &d, &d, &d, &alpha, b, &d, a, &d, &beta, c, &d)


cdef inline void _gemm_nc(int d, double complex alpha, double complex* a,
                          double complex* b, double complex beta,
                          double complex* c) noexcept nogil:
    # row-major c = alpha a@(b^H) + beta c
    zgemm(b'C', b'N', &d, &d, &d, &alpha, b, &d, a, &d, &beta, c, &d)


cdef void _rhs(int d, int nch, double complex* g, double complex* cs,
               double complex* rho, double complex* out,
               double complex* tmp) noexcept nogil:
    cdef int i
    cdef double complex one = 1.0, zero = 0.0
    _gemm_nn(d, one, g, rho, zero, out)
    _gemm_nc(d, one, rho, g, one, out)
    for i in range(nch):
        _gemm_nn(d, one, cs + i * d * d, rho, zero, tmp)
        _gemm_nc(d, one, tmp, cs + i * d * d, one, out)


cdef void _hermitize(int d, double complex* m) noexcept nogil:
    cdef int i, j
    cdef double complex avg
    for i in range(d):
        for j in range(i, d):
            avg = 0.5 * (m[i * d + j] + m[j * d + i].conjugate())
            m[i * d + j] = avg
            m[j * d + i] = avg.conjugate()


cdef double _error_norm(int n, double complex* err, double complex* y0,
                        double complex* y1, double rtol, double atol) noexcept nogil:
    cdef int i
    cdef double acc = 0.0, sc, m0, m1
    for i in range(n):
        m0 = abs(y0[i])
        m1 = abs(y1[i])
        sc = atol + rtol * (m0 if m0 > m1 else m1)
        m0 = abs(err[i]) / sc
        acc += m0 * m0
    return sqrt(acc / n)


cdef double _scaled_rms(int n, double complex* v, double complex* ref,
                        double rtol, double atol) noexcept nogil:
    cdef int i
    cdef double acc = 0.0, sc, m
    for i in range(n):
        sc = atol + rtol * abs(ref[i])
        m = abs(v[i]) / sc
        acc += m * m
    return sqrt(acc / n)


def propagate_rk45(g_in, cs_in, rho0, t_grid, double rtol, double atol):
    """Adaptive Dormand-Prince propagation hitting every grid time exactly.

    Returns (states, info) with states of shape (len(t_grid), d, d).
    """
    cdef double complex[:, ::1] g = np.array(g_in, dtype=np.complex128, order="C")
    cdef double complex[:, :, ::1] cs = np.array(cs_in, dtype=np.complex128, order="C").reshape(
        len(cs_in), g.shape[0], g.shape[0])
    cdef int d = g.shape[0]
    cdef int nch = cs.shape[0]
    cdef int n = d * d
    cdef int n_out = len(t_grid)
    cdef double[::1] tg = np.ascontiguousarray(t_grid, dtype=np.float64)

    states_np = np.empty((n_out, d, d), dtype=np.complex128)
    cdef double complex[:, :, ::1] states = states_np
    work_np = np.empty((11, n), dtype=np.complex128)
    cdef double complex[:, ::1] work = work_np

    cdef double complex* y = &work[0, 0]
    cdef double complex* ynew = &work[1, 0]
    cdef double complex* ys = &work[2, 0]
    cdef double complex* tmp = &work[3, 0]
    cdef double complex* k1 = &work[4, 0]
    cdef double complex* k2 = &work[5, 0]
    cdef double complex* k3 = &work[6, 0]
    cdef double complex* k4 = &work[7, 0]
    cdef double complex* k5 = &work[8, 0]
    cdef double complex* k6 = &work[9, 0]
    cdef double complex* k7 = &work[10, 0]
    cdef double complex* gp = &g[0, 0]
    cdef double complex* cp = &cs[0, 0, 0] if nch > 0 else NULL

    rho_flat = np.array(rho0, dtype=np.complex128).reshape(n)
    cdef double complex[::1] r0 = rho_flat
    cdef int i
    for i in range(n):
        y[i] = r0[i]
    states_np[0] = np.asarray(rho0, dtype=np.complex128)
    if n_out == 1:
        return states_np, {"n_steps": 0, "n_rejected": 0}

    cdef double t = tg[0]
    cdef double t_final = tg[n_out - 1]
    cdef double t_next = tg[1]
    cdef int out_idx = 1
    cdef long n_steps = 0, n_rejected = 0
    cdef double h, h_attempt, enorm, fac, d0, d1, d2, h0, h1
    cdef bint underflow = False, exhausted = False

    with nogil:
        _rhs(d, nch, gp, cp, y, k1, tmp)
        # Hairer-style initial step selection
        d0 = _scaled_rms(n, y, y, rtol, atol)
        d1 = _scaled_rms(n, k1, y, rtol, atol)
        h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
        for i in range(n):
            ys[i] = y[i] + h0 * k1[i]
        _rhs(d, nch, gp, cp, ys, k2, tmp)
        for i in range(n):
            ys[i] = k2[i] - k1[i]
        d2 = _scaled_rms(n, ys, y, rtol, atol) / h0
        if (d1 if d1 > d2 else d2) <= 1e-15:
            h1 = h0 * 1e-3 if h0 * 1e-3 > 1e-6 else 1e-6
        else:
            h1 = pow(0.01 / (d1 if d1 > d2 else d2), 0.2)
        h = 100.0 * h0
        if h1 < h:
            h = h1
        if t_final - t < h:
            h = t_final - t

        while out_idx < n_out:
            if n_steps + n_rejected > MAX_STEPS:
                exhausted = True
                break
            h_attempt = h
            if t_next - t < h_attempt:
                h_attempt = t_next - t
            if h_attempt < EPS16 * (fabs(t) if fabs(t) > 1.0 else 1.0):
                underflow = True
                break
            for i in range(n):
                ys[i] = y[i] + h_attempt * (0.2 * k1[i])
            _rhs(d, nch, gp, cp, ys, k2, tmp)
            for i in range(n):
                ys[i] = y[i] + h_attempt * (3.0 / 40.0 * k1[i] + 9.0 / 40.0 * k2[i])
            _rhs(d, nch, gp, cp, ys, k3, tmp)
            for i in range(n):
                ys[i] = y[i] + h_attempt * (44.0 / 45.0 * k1[i]
                                            - 56.0 / 15.0 * k2[i]
                                            + 32.0 / 9.0 * k3[i])
            _rhs(d, nch, gp, cp, ys, k4, tmp)
            for i in range(n):
                ys[i] = y[i] + h_attempt * (19372.0 / 6561.0 * k1[i]
                                            - 25360.0 / 2187.0 * k2[i]
                                            + 64448.0 / 6561.0 * k3[i]
                                            - 212.0 / 729.0 * k4[i])
            _rhs(d, nch, gp, cp, ys, k5, tmp)
            for i in range(n):
                ys[i] = y[i] + h_attempt * (9017.0 / 3168.0 * k1[i]
                                            - 355.0 / 33.0 * k2[i]
                                            + 46732.0 / 5247.0 * k3[i]
                                            + 49.0 / 176.0 * k4[i]
                                            - 5103.0 / 18656.0 * k5[i])
            _rhs(d, nch, gp, cp, ys, k6, tmp)
            for i in range(n):
                ynew[i] = y[i] + h_attempt * (35.0 / 384.0 * k1[i]
                                              + 500.0 / 1113.0 * k3[i]
                                              + 125.0 / 192.0 * k4[i]
                                              - 2187.0 / 6784.0 * k5[i]
                                              + 11.0 / 84.0 * k6[i])
            _rhs(d, nch, gp, cp, ynew, k7, tmp)
            for i in range(n):
                ys[i] = h_attempt * (71.0 / 57600.0 * k1[i]
                                     - 71.0 / 16695.0 * k3[i]
                                     + 71.0 / 1920.0 * k4[i]
                                     - 17253.0 / 339200.0 * k5[i]
                                     + 22.0 / 525.0 * k6[i]
                                     - 1.0 / 40.0 * k7[i])
            enorm = _error_norm(n, ys, y, ynew, rtol, atol)
            if enorm <= 1.0:
                n_steps += 1
                t += h_attempt
                for i in range(n):
                    y[i] = ynew[i]
                _hermitize(d, y)
                # FSAL; hermitization correction is at roundoff level
                for i in range(n):
                    k1[i] = k7[i]
                if enorm == 0.0:
                    fac = FAC_MAX
                else:
                    fac = SAFETY * pow(enorm, -0.2)
                    if fac > FAC_MAX:
                        fac = FAC_MAX
                    elif fac < FAC_MIN:
                        fac = FAC_MIN
                h = h_attempt * fac
                if fabs(t - t_next) <= 1e-14 * (fabs(t_next) if fabs(t_next) > 1.0 else 1.0):
                    t = t_next
                    for i in range(n):
                        states[out_idx, i // d, i % d] = y[i]
                    out_idx += 1
                    if out_idx < n_out:
                        t_next = tg[out_idx]
            else:
                n_rejected += 1
                fac = SAFETY * pow(enorm, -0.2)
                if fac > 1.0:
                    fac = 1.0
                elif fac < FAC_MIN:
                    fac = FAC_MIN
                h = h_attempt * fac

    if exhausted:
        raise NumericalError("step budget exhausted in adaptive integration")
    if underflow:
        raise NumericalError(f"step size underflow at t={t}")
    return states_np, {"n_steps": int(n_steps), "n_rejected": int(n_rejected)}


def propagate_rk4(g_in, cs_in, rho0, t_grid, double dt):
    """Classical fixed-step RK4; each grid interval is subdivided evenly
    into steps of length as close to dt as possible."""
    cdef double complex[:, ::1] g = np.array(g_in, dtype=np.complex128, order="C")
    cdef double complex[:, :, ::1] cs = np.array(cs_in, dtype=np.complex128, order="C").reshape(
        len(cs_in), g.shape[0], g.shape[0])
    cdef int d = g.shape[0]
    cdef int nch = cs.shape[0]
    cdef int n = d * d
    cdef int n_out = len(t_grid)
    cdef double[::1] tg = np.ascontiguousarray(t_grid, dtype=np.float64)

    states_np = np.empty((n_out, d, d), dtype=np.complex128)
    cdef double complex[:, :, ::1] states = states_np
    work_np = np.empty((7, n), dtype=np.complex128)
    cdef double complex[:, ::1] work = work_np
    cdef double complex* y = &work[0, 0]
    cdef double complex* ys = &work[1, 0]
    cdef double complex* tmp = &work[2, 0]
    cdef double complex* k1 = &work[3, 0]
    cdef double complex* k2 = &work[4, 0]
    cdef double complex* k3 = &work[5, 0]
    cdef double complex* k4 = &work[6, 0]
    cdef double complex* gp = &g[0, 0]
    cdef double complex* cp = &cs[0, 0, 0] if nch > 0 else NULL

    rho_flat = np.array(rho0, dtype=np.complex128).reshape(n)
    cdef double complex[::1] r0 = rho_flat
    cdef int i, idx, sub, n_sub
    for i in range(n):
        y[i] = r0[i]
    states_np[0] = np.asarray(rho0, dtype=np.complex128)

    cdef double span, h
    cdef long n_steps = 0
    with nogil:
        for idx in range(1, n_out):
            span = tg[idx] - tg[idx - 1]
            n_sub = <int> (span / dt + 0.5)
            if n_sub < 1:
                n_sub = 1
            h = span / n_sub
            for sub in range(n_sub):
                _rhs(d, nch, gp, cp, y, k1, tmp)
                for i in range(n):
                    ys[i] = y[i] + 0.5 * h * k1[i]
                _rhs(d, nch, gp, cp, ys, k2, tmp)
                for i in range(n):
                    ys[i] = y[i] + 0.5 * h * k2[i]
                _rhs(d, nch, gp, cp, ys, k3, tmp)
                for i in range(n):
                    ys[i] = y[i] + h * k3[i]
                _rhs(d, nch, gp, cp, ys, k4, tmp)
                for i in range(n):
                    y[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                _hermitize(d, y)
                n_steps += 1
            for i in range(n):
                states[idx, i // d, i % d] = y[i]
    return states_np, {"n_steps": int(n_steps), "n_rejected": 0}
