"""Invariant battery behind the `selftest` subcommand.

Fast end-to-end checks of the numerical contracts: structural scaling
data, decay rates, phase invariance of the dynamics, measured RK4
order, steady-state fixed points, and trace/positivity on a driven
strongly-Kerr scenario.
"""

from __future__ import annotations

import math

import numpy as np

from .fock import Operator, SpaceSignature, annihilation
from .limits import kerr_setup, chi2_setup, tpa_setup, verify_structural
from .master import (
    DensityMatrix,
    IntegratorConfig,
    integrate,
    liouvillian_apply,
    steady_state,
)
from .slh import SLHModel, build_kerr, build_qubit_limit


def _rotate_couplings(model: SLHModel, theta: float) -> SLHModel:
    phase = complex(math.cos(theta), math.sin(theta))
    return SLHModel(model.sig, model.S, tuple(phase * l for l in model.L), model.H)


def _check_structural():
    worst = 0.0
    for setup in (
        kerr_setup(-100.0, 10),
        chi2_setup(5000.0, (6, 4), g=-3000.0),
        tpa_setup(5000.0, 10),
    ):
        worst = max(worst, verify_structural(setup).max_residual)
    return worst <= 1e-12, f"max structural residual {worst:.2e}"


def _check_decay_rates():
    kappa = 0.3
    sig = SpaceSignature((4,))
    a = annihilation(sig)
    model = SLHModel(
        sig,
        ((Operator(sig, np.eye(4)),),),
        (math.sqrt(kappa) * a.dagger(),),
        Operator(sig, np.zeros((4, 4))),
    )
    rho = np.zeros((4, 4), dtype=np.complex128)
    rho[1, 1] = 1.0
    drho = liouvillian_apply(model, rho)
    err = max(abs(drho[1, 1].real + kappa), abs(drho[0, 0].real - kappa),
              abs(np.trace(drho)))
    return err <= 1e-12, f"single-photon decay rate error {err:.2e}"


def _check_phase_invariance():
    model = build_kerr(0.0, -20.0, 0.5, 0.0, 10, 10.0)
    rotated = _rotate_couplings(model, 0.7)
    cfg = IntegratorConfig(t_end=0.5, grid_points=101)
    rho0 = DensityMatrix.vacuum(model.sig)
    t1 = integrate(model, rho0, cfg)
    t2 = integrate(rotated, rho0, cfg)
    diff = max(
        float(np.abs(t1.series(k) - t2.series(k)).max())
        for k in ("pop0", "pop1", "n_expect")
    )
    return diff <= 1e-10, f"trajectory difference under L -> e^(i theta) L: {diff:.2e}"


def _check_rk4_order():
    model = build_qubit_limit(0.0, 0.5, 0.0, 10.0)
    rho0 = DensityMatrix.vacuum(model.sig)
    ref = integrate(
        model, rho0, IntegratorConfig(t_end=2.0, grid_points=11, rtol=1e-12, atol=1e-14)
    ).final_state.mat
    errs = []
    for dt in (0.02, 0.01):
        fin = integrate(
            model, rho0,
            IntegratorConfig(t_end=2.0, grid_points=11, method="fixed-RK4", dt=dt),
        ).final_state.mat
        errs.append(np.linalg.norm(fin - ref))
    order = math.log2(errs[0] / errs[1])
    return order >= 3.8, f"measured RK4 order {order:.2f}"


def _check_steady_fixed_point():
    # integrate below the check tolerance: the stepper's noise floor on
    # weakly damped oscillatory coherences scales with rtol
    worst = 0.0
    for model in (
        build_qubit_limit(0.0, 0.5, 0.0, 10.0),
        build_kerr(0.0, -20.0, 0.5, 0.0, 10, 2.0),
    ):
        ss = steady_state(model)
        traj = integrate(model, ss, IntegratorConfig(t_end=1.0, grid_points=11,
                                                     rtol=1e-10, atol=1e-12))
        worst = max(worst, float(np.linalg.norm(traj.final_state.mat - ss.mat)))
    return worst <= 1e-7, f"steady-state drift over unit time {worst:.2e}"


def _check_trace_positivity():
    model = build_kerr(0.0, -100.0, 0.5, 0.0, 15, 10.0)
    traj = integrate(model, DensityMatrix.vacuum(model.sig),
                     IntegratorConfig(t_end=2.0, grid_points=201))
    drift = traj.info["trace_drift_rate"]
    mineig = traj.info["min_eigenvalue"]
    ok = drift <= 1e-8 and mineig >= -1e-7
    return ok, f"trace drift {drift:.2e}/unit time, min eigenvalue {mineig:.2e}"


_CHECKS = (
    ("structural-setups", _check_structural),
    ("decay-rates", _check_decay_rates),
    ("phase-invariance", _check_phase_invariance),
    ("rk4-order", _check_rk4_order),
    ("steady-fixed-point", _check_steady_fixed_point),
    ("trace-positivity", _check_trace_positivity),
)


def run_selftest(verbose: bool = True) -> bool:
    all_ok = True
    for name, fn in _CHECKS:
        ok, detail = fn()
        all_ok = all_ok and ok
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return all_ok
