import math

import numpy as np
import pytest

from nlcavity import (
    DimensionMismatch,
    DriveSpec,
    SpaceSignature,
    annihilation,
    apply_coherent_drive,
    build_chi2,
    build_chi2_dispersive,
    build_kerr,
    build_qubit_limit,
    build_tpa,
    liouvillian_apply,
    qubit_limit_series_form,
    series_product,
    weyl_model,
)
from nlcavity.fock import Operator, identity, zero
from nlcavity.slh import SLHModel, _identity_scattering

ALPHA = 10.0
KA1 = 0.5


def _undriven_kerr(chi, dim):
    sig = SpaceSignature((dim,))
    a = annihilation(sig)
    ad = a.dagger()
    h = chi * (ad @ ad @ a @ a)
    return SLHModel(
        sig,
        _identity_scattering(sig, 2),
        (math.sqrt(KA1) * ad, 0.0 * ad),
        h,
    )


def _random_density(dim, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = x @ x.conj().T
    return rho / np.trace(rho)


def test_drive_composition_matches_expected_terms():
    base = _undriven_kerr(-100.0, 6)
    driven = apply_coherent_drive(base, DriveSpec(0, ALPHA))
    a = annihilation(base.sig).mat
    ad = a.conj().T
    # L1 -> sqrt(kappa) a^dag + conj(alpha), L2 unchanged
    assert np.allclose(driven.L[0].mat, math.sqrt(KA1) * ad + np.conj(ALPHA) * np.eye(6),
                       atol=1e-14)
    assert np.array_equal(driven.L[1].mat, base.L[1].mat)
    # H gains (sqrt(kappa)/2i)(alpha a^dag - conj(alpha) a)
    gained = driven.H.mat - base.H.mat
    expected = (math.sqrt(KA1) / 2j) * (ALPHA * ad - np.conj(ALPHA) * a)
    assert np.allclose(gained, expected, atol=1e-14)


def test_zero_drive_is_identity():
    base = _undriven_kerr(-20.0, 5)
    driven = apply_coherent_drive(base, DriveSpec(0, 0.0))
    assert np.array_equal(driven.H.mat, base.H.mat)
    for l1, l2 in zip(driven.L, base.L):
        assert np.array_equal(l1.mat, l2.mat)


def test_weyl_composition_adds_displacements():
    sig = SpaceSignature((3,))
    w1 = weyl_model(sig, 1, 0, 1.0 + 2.0j)
    w2 = weyl_model(sig, 1, 0, 0.5 - 1.0j)
    comp = series_product(w2, w1)
    assert np.allclose(comp.L[0].mat, np.conj(1.5 + 1.0j) * np.eye(3), atol=1e-15)


def test_series_product_associative():
    base = _undriven_kerr(-50.0, 5)
    w1 = weyl_model(base.sig, 2, 0, 2.0 + 1.0j)
    w2 = weyl_model(base.sig, 2, 0, -0.5j)
    left = series_product(series_product(base, w1), w2)
    right = series_product(base, series_product(w1, w2))
    assert np.abs(left.H.mat - right.H.mat).max() < 1e-12
    for l1, l2 in zip(left.L, right.L):
        assert np.abs(l1.mat - l2.mat).max() < 1e-12


def test_series_product_rejects_mismatch():
    base = _undriven_kerr(-50.0, 5)
    with pytest.raises(DimensionMismatch):
        series_product(base, weyl_model(base.sig, 3, 0, 1.0))
    with pytest.raises(DimensionMismatch):
        series_product(base, weyl_model(SpaceSignature((4,)), 2, 0, 1.0))


def test_kerr_spectrum_anharmonic():
    c = 7.0
    m = build_kerr(c, c, KA1, 0.0, 5, 0.0)
    eigs = np.sort(np.linalg.eigvalsh(m.H.mat))[:3]
    # (delta - chi + chi m) m with delta = chi gives 0, c, 4c
    assert np.allclose(eigs, [0.0, c, 4 * c], atol=1e-10)


def test_kerr_spectrum_strong_negative():
    m = build_kerr(0.0, -100.0, KA1, 0.0, 4, 0.0)
    eigs = np.sort(np.linalg.eigvalsh(m.H.mat))
    assert np.allclose(eigs, [-600.0, -200.0, 0.0, 0.0], atol=1e-10)


def test_kerr_drive_bit_identical_to_series_product():
    driven = build_kerr(0.0, -100.0, KA1, 0.0, 8, ALPHA)
    via_series = apply_coherent_drive(_undriven_kerr(-100.0, 8), DriveSpec(0, ALPHA))
    assert np.array_equal(driven.H.mat, via_series.H.mat)
    for l1, l2 in zip(driven.L, via_series.L):
        assert np.array_equal(l1.mat, l2.mat)


def test_kerr_zero_rate_channel_kept():
    m = build_kerr(0.0, -10.0, KA1, 0.0, 4, 0.0)
    assert m.n_channels == 2
    assert np.abs(m.L[1].mat).max() == 0.0


def test_kerr_rejects_negative_rate():
    with pytest.raises(DimensionMismatch):
        build_kerr(0.0, -10.0, -0.5, 0.0, 4, 1.0)
    with pytest.raises(DimensionMismatch):
        build_tpa(0.0, 0.5, 0.0, -1.0, 1.0, 4)


def test_chi2_decoupled_pump_matches_linear_cavity():
    from nlcavity import DensityMatrix, IntegratorConfig, integrate

    cfg = IntegratorConfig(t_end=1.0, grid_points=51)
    two = build_chi2(0.3, 0.0, KA1, 0.0, 2.0, 1.5, (6, 3))
    one = build_kerr(0.3, 0.0, KA1, 0.0, 6, 1.5)
    t2 = integrate(two, DensityMatrix.vacuum(two.sig), cfg)
    t1 = integrate(one, DensityMatrix.vacuum(one.sig), cfg)
    assert np.abs(t2.mode_populations[0] - t1.mode_populations[0]).max() < 1e-9


def test_chi2_hamiltonian_hermitian_and_finite():
    m = build_chi2(0.0, -3000.0, KA1, 0.0, 5000.0, ALPHA, (8, 4))
    assert m.H.is_hermitian()
    assert np.isfinite(np.linalg.norm(m.H.mat))
    assert m.n_channels == 3


def test_chi2_dispersive_reduces_to_plain_chi2():
    delta = 0.4
    plain = build_chi2(delta, -100.0, KA1, 0.1, 50.0, 2.0, (5, 4))
    disp = build_chi2_dispersive(delta, -100.0, 2 * delta, KA1, 0.1, 50.0, 2.0, (5, 4))
    assert np.array_equal(plain.H.mat, disp.H.mat)
    for l1, l2 in zip(plain.L, disp.L):
        assert np.array_equal(l1.mat, l2.mat)


def test_tpa_pair_loss_rate():
    gamma = 3.0
    m = build_tpa(0.0, 0.0, 0.0, gamma, 0.0, 4)
    rho = np.zeros((4, 4), dtype=complex)
    rho[2, 2] = 1.0
    drho = liouvillian_apply(m, rho)
    # aa|2> = sqrt(2)|0>, so population arrives in |0> at rate 2 gamma
    assert abs(drho[0, 0].real - 2 * gamma) < 1e-12
    assert abs(drho[2, 2].real + 2 * gamma) < 1e-12


def test_tpa_constructs_at_strong_rate():
    m = build_tpa(0.0, KA1, 0.0, 5000.0, ALPHA, 12)
    assert m.n_channels == 3
    assert np.isfinite(np.linalg.norm(m.H.mat))


def test_qubit_limit_matrices():
    m = build_qubit_limit(0.7, KA1, 0.25, ALPHA)
    sigma = np.array([[0, 1], [0, 0]], dtype=complex)
    expected_h = 0.7 * sigma.conj().T @ sigma - 1j * math.sqrt(KA1) * (
        ALPHA * sigma.conj().T - ALPHA * sigma
    )
    assert np.allclose(m.H.mat, expected_h, atol=1e-14)
    assert m.n_channels == 1
    assert np.allclose(m.L[0].mat, math.sqrt(0.75) * sigma.conj().T, atol=1e-15)


def test_drive_conventions_generate_same_master_equation():
    # full drive in H (single channel) vs series-product form (alpha in L):
    # the dissipator cross terms supply the missing commutator half
    pure_h = build_qubit_limit(0.2, KA1, 0.1, 2.0 - 1.0j)
    series = qubit_limit_series_form(0.2, KA1, 0.1, 2.0 - 1.0j)
    rho = _random_density(2, seed=3)
    assert np.abs(
        liouvillian_apply(pure_h, rho) - liouvillian_apply(series, rho)
    ).max() < 1e-12


def test_rhs_invariant_under_coupling_phase():
    m = build_kerr(0.0, -20.0, KA1, 0.1, 6, ALPHA)
    phase = np.exp(0.9j)
    rotated = SLHModel(m.sig, m.S, tuple(phase * l for l in m.L), m.H)
    rho = _random_density(6, seed=1)
    d1 = liouvillian_apply(m, rho)
    d2 = liouvillian_apply(rotated, rho)
    assert np.abs(d1 - d2).max() < 1e-12


def test_model_requires_hermitian_hamiltonian():
    sig = SpaceSignature((3,))
    bad = Operator(sig, np.diag([0.0, 1.0, 2.0]) + 0.1j * np.eye(3))
    with pytest.raises(DimensionMismatch):
        SLHModel(sig, _identity_scattering(sig, 1), (zero(sig),), bad)


def test_builders_hermitian():
    for m in (
        build_kerr(0.1, -5.0, KA1, 0.2, 6, 1.0 + 0.5j),
        build_chi2(0.1, -30.0, KA1, 0.0, 10.0, 1.0, (5, 4)),
        build_chi2_dispersive(0.1, -30.0, 7.0, KA1, 0.0, 10.0, 1.0, (5, 4)),
        build_tpa(0.1, KA1, 0.0, 2.0, 1.0, 6),
        build_qubit_limit(0.1, KA1, 0.0, 1.0 - 2.0j),
    ):
        assert m.H.is_hermitian()
