import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from nlcavity import (
    DensityMatrix,
    DimensionMismatch,
    IntegratorConfig,
    InvariantViolation,
    NumericalError,
    SpaceSignature,
    annihilation,
    build_kerr,
    build_qubit_limit,
    build_tpa,
    expectation,
    fock_state,
    integrate,
    leakage,
    liouvillian_apply,
    liouvillian_matrix,
    number,
    populations,
    steady_state,
    truncation_check,
)
from nlcavity.fock import Operator, identity, zero
from nlcavity.slh import SLHModel, _identity_scattering

KA1, ALPHA = 0.5, 10.0
OMEGA = 2.0 * math.sqrt(KA1) * ALPHA  # Rabi frequency of the driven two-level limit


def _decay_model(kappa, dim):
    sig = SpaceSignature((dim,))
    ad = annihilation(sig).dagger()
    return SLHModel(sig, _identity_scattering(sig, 1), (math.sqrt(kappa) * ad,),
                    zero(sig))


def test_single_photon_decay_rates():
    kappa = 0.8
    m = _decay_model(kappa, 4)
    rho = np.zeros((4, 4), dtype=complex)
    rho[1, 1] = 1.0
    drho = liouvillian_apply(m, rho)
    assert abs(drho[1, 1].real + kappa) < 1e-14
    assert abs(drho[0, 0].real - kappa) < 1e-14


def test_rhs_traceless():
    m = build_kerr(0.0, -20.0, KA1, 0.1, 8, ALPHA)
    rng = np.random.default_rng(7)
    x = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    rho = x @ x.conj().T
    rho /= np.trace(rho)
    assert abs(np.trace(liouvillian_apply(m, rho))) < 1e-12


def test_rhs_matches_superoperator_matrix():
    m = build_tpa(0.1, KA1, 0.2, 2.0, 1.0 + 0.5j, 6)
    rng = np.random.default_rng(11)
    x = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    rho = x @ x.conj().T
    rho /= np.trace(rho)
    direct = liouvillian_apply(m, rho)
    via_matrix = (liouvillian_matrix(m) @ rho.reshape(36)).reshape(6, 6)
    assert np.abs(direct - via_matrix).max() < 1e-12


def test_short_time_rabi_curvature():
    # pop1 ~ (Omega t / 2)^2, so its second derivative at t=0 is Omega^2/2
    m = build_qubit_limit(0.0, KA1, 0.0, ALPHA)
    h = 1e-3
    cfg = IntegratorConfig(t_end=2 * h, grid_points=3, rtol=1e-12, atol=1e-14)
    traj = integrate(m, DensityMatrix.vacuum(m.sig), cfg)
    p = traj.series("pop1")
    d1 = (p[1] - p[0]) / h
    d2 = (p[2] - 2 * p[1] + p[0]) / h**2
    assert abs(d1) < OMEGA**2 * h  # slope consistent with 0 at first order
    assert abs(d2 - OMEGA**2 / 2) < 1e-3 * OMEGA**2 / 2


def _bloch_reference(t_grid, kappa, omega):
    """Independent oracle: driven two-level master equation as a flat ODE
    solved by scipy with an explicitly written right-hand side."""

    def rhs(_, y):
        p1 = y[0]
        re, im = y[1], y[2]
        # H = -i (omega/2)(sigma^dag - sigma); rho01 = <0|rho|1>
        dp1 = -kappa * p1 - omega * re
        dre = 0.5 * omega * (2 * p1 - 1.0) - 0.5 * kappa * re
        dim_ = -0.5 * kappa * im
        return [dp1, dre, dim_]

    sol = solve_ivp(rhs, (t_grid[0], t_grid[-1]), [0.0, 0.0, 0.0], t_eval=t_grid,
                    rtol=1e-11, atol=1e-13)
    return sol.y[0]


def test_qubit_trajectory_matches_bloch_oracle():
    m = build_qubit_limit(0.0, KA1, 0.0, ALPHA)
    cfg = IntegratorConfig(t_end=2.0, grid_points=201)
    traj = integrate(m, DensityMatrix.vacuum(m.sig), cfg)
    ref = _bloch_reference(traj.times, KA1, OMEGA)
    assert np.abs(traj.series("pop1") - ref).max() < 1e-7


def test_first_rabi_maximum_position():
    m = build_qubit_limit(0.0, KA1, 0.0, ALPHA)
    cfg = IntegratorConfig(t_end=0.5, grid_points=501)
    traj = integrate(m, DensityMatrix.vacuum(m.sig), cfg)
    p = traj.series("pop1")
    i = int(np.argmax(p))
    omega_damped = math.sqrt(OMEGA**2 - KA1**2 / 16.0)
    # the decaying envelope shifts the extremum by O(kappa/Omega^2)
    assert abs(traj.times[i] - math.pi / omega_damped) < 5e-3


def test_qubit_free_decay():
    kappa = 0.75
    m = build_qubit_limit(0.3, 0.5, 0.25, 0.0)  # alpha=0, kappa_a = 0.75
    rho0 = DensityMatrix.from_state(fock_state([2], [1]))
    traj = integrate(m, rho0, IntegratorConfig(t_end=4.0, grid_points=81))
    assert np.abs(traj.series("pop1") - np.exp(-kappa * traj.times)).max() < 1e-8


def test_free_decay_photon_number():
    m = build_kerr(0.0, 0.0, 0.3, 0.2, 6, 0.0)  # chi=0, alpha=0: bare decay at kappa_a
    rho0 = DensityMatrix.from_state(fock_state([6], [1]))
    cfg = IntegratorConfig(t_end=3.0, grid_points=61)
    traj = integrate(m, rho0, cfg)
    expected = np.exp(-0.5 * traj.times)
    assert np.abs(traj.series("n_expect") - expected).max() < 1e-8


def test_linear_cavity_saturates_to_classical_value():
    m = build_tpa(0.0, KA1, 0.0, 0.0, 1.0, 30)
    cfg = IntegratorConfig(t_end=40.0, grid_points=161)
    traj = integrate(m, DensityMatrix.vacuum(m.sig), cfg)
    target = KA1 * 1.0**2 / (KA1 / 2.0) ** 2
    assert target == 8.0
    assert abs(traj.series("n_expect")[-1] - target) < 0.01 * target


def test_rk4_order():
    m = build_qubit_limit(0.0, KA1, 0.0, ALPHA)
    rho0 = DensityMatrix.vacuum(m.sig)
    ref = integrate(m, rho0, IntegratorConfig(t_end=2.0, grid_points=11,
                                              rtol=1e-12, atol=1e-14)).final_state.mat
    errs = []
    for dt in (0.02, 0.01):
        cfg = IntegratorConfig(t_end=2.0, grid_points=11, method="fixed-RK4", dt=dt)
        errs.append(np.linalg.norm(integrate(m, rho0, cfg).final_state.mat - ref))
    order = math.log2(errs[0] / errs[1])
    assert order >= 3.8


def test_trajectory_phase_invariance():
    m = build_kerr(0.0, -20.0, KA1, 0.0, 10, ALPHA)
    phase = np.exp(1.3j)
    rotated = SLHModel(m.sig, m.S, tuple(phase * l for l in m.L), m.H)
    cfg = IntegratorConfig(t_end=1.0, grid_points=101)
    rho0 = DensityMatrix.vacuum(m.sig)
    t1 = integrate(m, rho0, cfg)
    t2 = integrate(rotated, rho0, cfg)
    for k in ("pop0", "pop1", "n_expect"):
        assert np.abs(t1.series(k) - t2.series(k)).max() < 1e-10


def test_steady_state_qubit_analytic():
    m = build_qubit_limit(0.0, KA1, 0.0, ALPHA)
    rho = steady_state(m)
    expected = (OMEGA**2 / 4.0) / (KA1**2 / 4.0 + OMEGA**2 / 2.0)
    assert expected == pytest.approx(50.0 / 100.0625, abs=1e-12)
    assert abs(rho.mat[1, 1].real - expected) < 1e-6


def test_steady_state_undriven_cavity_is_vacuum():
    rho = steady_state(_decay_model(0.4, 8))
    expected = np.zeros((8, 8))
    expected[0, 0] = 1.0
    assert np.abs(rho.mat - expected).max() < 1e-10


def test_steady_state_large_dim_uses_qr_path():
    # d^2 = 2601 > 2500 exercises the pivoted-QR branch
    m = build_tpa(0.0, KA1, 0.0, 5.0, 2.0, 51)
    rho = steady_state(m)
    res = np.abs(liouvillian_matrix(m) @ rho.mat.reshape(-1)).max()
    assert res < 1e-9
    rho.validate()


def test_steady_state_degenerate_reported():
    # partial lowering |0><1| leaves |2><2| dark: two steady states
    sig = SpaceSignature((3,))
    lower = np.zeros((3, 3), dtype=complex)
    lower[0, 1] = 1.0
    m = SLHModel(sig, _identity_scattering(sig, 1),
                 (Operator(sig, lower.conj().T),), zero(sig))
    with pytest.raises(NumericalError, match="multiplicity"):
        steady_state(m)


def test_steady_state_dense_limit():
    m = build_tpa(0.0, KA1, 0.0, 1.0, 1.0, 70)
    with pytest.raises(NumericalError, match="dense"):
        steady_state(m)


def test_steady_state_is_fixed_point():
    m = build_qubit_limit(0.0, KA1, 0.0, ALPHA)
    ss = steady_state(m)
    traj = integrate(m, ss, IntegratorConfig(t_end=1.0, grid_points=11))
    assert np.linalg.norm(traj.final_state.mat - ss.mat) < 1e-7


def test_expectation_and_populations():
    sig = SpaceSignature((4,))
    rho = DensityMatrix.from_state(fock_state(sig, [2]))
    assert expectation(rho, number(sig)) == pytest.approx(2.0)
    pops = populations(rho, [(0,), (1,), (2,), (3,)])
    assert pops.sum() == pytest.approx(1.0)
    assert leakage(rho) == pytest.approx(1.0)


def test_leakage_vanishes_on_two_level_space():
    rho = DensityMatrix.vacuum(SpaceSignature((2,)))
    assert leakage(rho) == pytest.approx(0.0, abs=1e-15)


def test_truncation_check():
    m = build_tpa(0.0, KA1, 0.0, 0.0, 1.0, 40)
    traj = integrate(m, DensityMatrix.vacuum(m.sig),
                     IntegratorConfig(t_end=5.0, grid_points=51))
    assert truncation_check(traj) < 1e-10

    q = build_qubit_limit(0.0, KA1, 0.0, ALPHA)
    tq = integrate(q, DensityMatrix.vacuum(q.sig),
                   IntegratorConfig(t_end=1.0, grid_points=11))
    assert truncation_check(tq) == 0.0

    k = build_kerr(0.0, -20.0, KA1, 0.0, 15, ALPHA)
    tk = integrate(k, DensityMatrix.vacuum(k.sig),
                   IntegratorConfig(t_end=2.0, grid_points=101))
    assert 0.0 < truncation_check(tk) < 1e-6


def test_density_matrix_validation():
    sig = SpaceSignature((2,))
    with pytest.raises(InvariantViolation):
        DensityMatrix(sig, np.diag([0.7, 0.7])).validate()  # trace 1.4
    with pytest.raises(InvariantViolation):
        DensityMatrix(sig, np.array([[1.0, 0.5], [0.0, 0.0]])).validate()
    with pytest.raises(InvariantViolation):
        DensityMatrix(sig, np.diag([1.5, -0.5])).validate()


def test_integrate_rejects_mismatched_state():
    m = build_qubit_limit(0.0, KA1, 0.0, ALPHA)
    rho = DensityMatrix.vacuum(SpaceSignature((3,)))
    with pytest.raises(DimensionMismatch):
        integrate(m, rho, IntegratorConfig(t_end=1.0))


def test_integrator_config_validation():
    with pytest.raises(DimensionMismatch):
        IntegratorConfig(t_end=-1.0)
    with pytest.raises(DimensionMismatch):
        IntegratorConfig(t_end=1.0, method="euler")
    with pytest.raises(DimensionMismatch):
        IntegratorConfig(t_end=1.0, grid_points=1)


def test_trace_error_recorded_not_renormalized():
    m = build_kerr(0.0, -100.0, KA1, 0.0, 15, ALPHA)
    traj = integrate(m, DensityMatrix.vacuum(m.sig),
                     IntegratorConfig(t_end=1.0, grid_points=101))
    err = traj.series("trace_err")
    assert err.max() < 1e-10
    assert traj.info["trace_drift_rate"] <= 1e-8
    assert traj.info["min_eigenvalue"] >= -1e-7
