"""Pure-numpy propagation kernels.

Fallback backend used when the compiled extension is unavailable (or
explicitly disabled).  The algorithms mirror ``_core.pyx`` exactly:
Dormand-Prince 5(4) with FSAL and a standard step controller, and a
fixed-step classical RK4.  The right-hand side is the Lindblad
generator in matrix form,

    drho/dt = G rho + rho G^dag + sum_i C_i rho C_i^dag,

with G = -iH - (1/2) sum_i C_i^dag C_i precomputed by the caller and
C_i the usual jump operators.  The density matrix is re-hermitized
after every accepted step.
"""

import numpy as np

from .errors import NumericalError

BACKEND_NAME = "python"

# Dormand-Prince 5(4) tableau
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
# b - b*, applied to k_1..k_7 for the embedded error estimate
_E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

_MAX_STEPS = 200_000_000
_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 5.0


def _rhs(g, cs, rho):
    out = g @ rho
    out += rho @ g.conj().T
    for c in cs:
        out += (c @ rho) @ c.conj().T
    return out


def _hermitize(rho):
    rho += rho.conj().T
    rho *= 0.5


def _error_norm(err, y0, y1, rtol, atol):
    sc = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean(np.abs(err / sc) ** 2)))


def _initial_step(g, cs, rho0, f0, t_span, rtol, atol):
    sc = atol + rtol * np.abs(rho0)
    d0 = np.sqrt(np.mean(np.abs(rho0 / sc) ** 2))
    d1 = np.sqrt(np.mean(np.abs(f0 / sc) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = _rhs(g, cs, rho0 + h0 * f0)
    d2 = np.sqrt(np.mean(np.abs((f1 - f0) / sc) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, t_span)


def propagate_rk45(g, cs, rho0, t_grid, rtol, atol):
    """Adaptive Dormand-Prince propagation hitting every grid time exactly.

    Returns (states, info) with states of shape (len(t_grid), d, d).
    """
    g = np.ascontiguousarray(g, dtype=np.complex128)
    cs = [np.ascontiguousarray(c, dtype=np.complex128) for c in cs]
    d = g.shape[0]
    n_out = len(t_grid)
    states = np.empty((n_out, d, d), dtype=np.complex128)
    y = np.array(rho0, dtype=np.complex128)
    states[0] = y
    t = float(t_grid[0])
    t_final = float(t_grid[-1])
    if n_out == 1:
        return states, {"n_steps": 0, "n_rejected": 0}

    k = [None] * 7
    k[0] = _rhs(g, cs, y)
    h = _initial_step(g, cs, y, k[0], t_final - t, rtol, atol)
    n_steps = 0
    n_rejected = 0
    out_idx = 1
    t_next = float(t_grid[out_idx])

    while out_idx < n_out:
        if n_steps + n_rejected > _MAX_STEPS:
            raise NumericalError("step budget exhausted in adaptive integration")
        h_attempt = min(h, t_next - t)
        if h_attempt < 16 * np.finfo(float).eps * max(abs(t), 1.0):
            raise NumericalError(f"step size underflow at t={t}")
        for i in range(1, 6):
            yi = y.copy()
            for j, aij in enumerate(_A[i]):
                if aij != 0.0:
                    yi += (h_attempt * aij) * k[j]
            k[i] = _rhs(g, cs, yi)
        # stage 7 argument is the 5th-order solution itself (FSAL)
        y_new = y.copy()
        for j, bj in enumerate(_A[6]):
            if bj != 0.0:
                y_new += (h_attempt * bj) * k[j]
        k[6] = _rhs(g, cs, y_new)
        err = np.zeros_like(y)
        for j, ej in enumerate(_E):
            if ej != 0.0:
                err += (h_attempt * ej) * k[j]
        enorm = _error_norm(err, y, y_new, rtol, atol)
        if enorm <= 1.0:
            n_steps += 1
            t += h_attempt
            y = y_new
            _hermitize(y)
            k[0] = k[6]  # FSAL; hermitization correction is at roundoff level
            fac = _FAC_MAX if enorm == 0.0 else min(_FAC_MAX, max(_FAC_MIN, _SAFETY * enorm ** -0.2))
            h = h_attempt * fac
            if abs(t - t_next) <= 1e-14 * max(1.0, abs(t_next)):
                t = t_next
                states[out_idx] = y
                out_idx += 1
                if out_idx < n_out:
                    t_next = float(t_grid[out_idx])
        else:
            n_rejected += 1
            h = h_attempt * max(_FAC_MIN, min(1.0, _SAFETY * enorm ** -0.2))
    return states, {"n_steps": n_steps, "n_rejected": n_rejected}


def propagate_rk4(g, cs, rho0, t_grid, dt):
    """Classical fixed-step RK4; each grid interval is subdivided evenly
    into steps of length as close to dt as possible."""
    g = np.ascontiguousarray(g, dtype=np.complex128)
    cs = [np.ascontiguousarray(c, dtype=np.complex128) for c in cs]
    d = g.shape[0]
    n_out = len(t_grid)
    states = np.empty((n_out, d, d), dtype=np.complex128)
    y = np.array(rho0, dtype=np.complex128)
    states[0] = y
    n_steps = 0
    for idx in range(1, n_out):
        span = float(t_grid[idx]) - float(t_grid[idx - 1])
        n_sub = max(1, int(round(span / dt)))
        h = span / n_sub
        for _ in range(n_sub):
            k1 = _rhs(g, cs, y)
            k2 = _rhs(g, cs, y + (0.5 * h) * k1)
            k3 = _rhs(g, cs, y + (0.5 * h) * k2)
            k4 = _rhs(g, cs, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            _hermitize(y)
            n_steps += 1
        states[idx] = y
    return states, {"n_steps": n_steps, "n_rejected": 0}
