import math

import numpy as np
import pytest

from nlcavity import (
    DimensionMismatch,
    SpaceSignature,
    StateVector,
    annihilation,
    coherent_state,
    commutator,
    creation,
    displacement_operator,
    fock_state,
    identity,
    number,
    parity_operator,
    tensor,
)


def test_annihilation_matrix_entries():
    a = annihilation([3])
    expected = np.zeros((3, 3), dtype=complex)
    expected[0, 1] = 1.0
    expected[1, 2] = math.sqrt(2.0)
    assert np.array_equal(a.mat, expected)


def test_number_operator_diagonal():
    n = number([4])
    assert np.allclose(n.mat, np.diag([0.0, 1.0, 2.0, 3.0]), atol=1e-12)


def test_two_mode_operators_commute():
    sig = [2, 2]
    a = annihilation(sig, 0)
    b = annihilation(sig, 1)
    assert np.abs(commutator(a, b.dagger()).mat).max() == 0.0


def test_creation_is_dagger_of_annihilation():
    a = annihilation([5])
    assert np.array_equal(creation([5]).mat, a.dagger().mat)
    # <1|a^dag|0> = 1
    assert creation([5]).mat[1, 0] == 1.0


def test_double_creation_from_vacuum():
    ad = creation([3])
    vac = fock_state([3], [0])
    out = ad.mat @ (ad.mat @ vac.amplitudes)
    assert abs(out[2] - math.sqrt(2.0)) < 1e-15
    assert np.abs(out[[0, 1]]).max() == 0.0


def test_commutator_with_identity_vanishes():
    n = number([5])
    assert np.abs(commutator(n, identity([5])).mat).max() == 0.0


def test_truncated_ccr_defect():
    # [a, a^dag] = identity except the top diagonal entry, which picks up
    # -(N-1) from the missing level above the truncation
    a = annihilation([4])
    c = commutator(a, a.dagger()).mat
    assert np.allclose(c, np.diag([1.0, 1.0, 1.0, -3.0]), atol=1e-12)


def test_tensor_of_identities():
    assert np.array_equal(tensor(identity([2]), identity([2])).mat, np.eye(4))


def test_tensor_associative():
    a2 = annihilation([2])
    i2 = identity([2])
    left = tensor(tensor(a2, i2), a2)
    right = tensor(a2, tensor(i2, a2))
    assert np.array_equal(left.mat, right.mat)
    # generic factors agree to rounding
    a3 = annihilation([3])
    left = tensor(tensor(a2, a3), a2)
    right = tensor(a2, tensor(a3, a2))
    assert np.allclose(left.mat, right.mat, atol=1e-15)
    assert left.sig == right.sig == SpaceSignature((2, 3, 2))


def test_constructors_deterministic():
    for build in (lambda: annihilation([7]), lambda: displacement_operator(12, 0.3 + 0.1j)):
        assert np.array_equal(build().mat, build().mat)


def test_fock_state_basis_vector():
    psi = fock_state([3], [1])
    assert np.array_equal(psi.amplitudes, np.array([0, 1, 0], dtype=complex))


def test_coherent_state_vacuum_limit():
    psi = coherent_state(40, 0.0)
    assert psi.amplitudes[0] == 1.0
    assert np.abs(psi.amplitudes[1:]).max() == 0.0


def test_coherent_state_field_amplitude():
    psi = coherent_state(40, 2.0)
    a = annihilation([40])
    assert abs(psi.expectation(a) - 2.0) < 1e-6


def test_displacement_identity_at_zero():
    assert np.allclose(displacement_operator(10, 0.0).mat, np.eye(10), atol=1e-15)


def test_displacement_generates_coherent_state():
    d = displacement_operator(40, 1.2)
    vac = np.zeros(40, dtype=complex)
    vac[0] = 1.0
    assert np.abs(d.mat @ vac - coherent_state(40, 1.2).amplitudes).max() < 1e-10


@pytest.mark.parametrize("beta", [0.5, 1.5 + 1.0j, 3.0])
def test_displacement_unitary(beta):
    d = displacement_operator(40, beta).mat
    assert np.abs(d @ d.conj().T - np.eye(40)).max() < 1e-9


def test_parity_operator():
    p = parity_operator(6)
    assert np.allclose(p.mat @ p.mat, np.eye(6), atol=0)
    assert p.mat[0, 0] == 1.0
    assert p.mat[1, 1] == -1.0


def test_ccr_exact_below_truncation():
    a = annihilation([12])
    c = commutator(a, a.dagger()).mat
    assert np.abs(c[:11, :11] - np.eye(11)).max() < 1e-12


def test_invalid_mode_index_rejected():
    with pytest.raises(DimensionMismatch):
        annihilation([3], mode_index=1)
    with pytest.raises(DimensionMismatch):
        annihilation([1])  # needs dim >= 2


def test_signature_mismatch_rejected():
    with pytest.raises(DimensionMismatch):
        annihilation([3]) + annihilation([4])
    with pytest.raises(DimensionMismatch):
        annihilation([2, 2], 0) @ annihilation([4])


def test_state_norm_enforced():
    with pytest.raises(DimensionMismatch):
        StateVector(SpaceSignature((2,)), np.array([1.0, 1.0]))


def test_dagger_involution():
    x = tensor(annihilation([3]), creation([2]))
    assert np.array_equal(x.dagger().dagger().mat, x.mat)
