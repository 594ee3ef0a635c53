"""SLH models of driven nonlinear cavities and their qubit limit.

Coupling operators are stored in the conjugate convention: each L_i is
the hermitian conjugate of the usual quantum-optics Lindblad (jump)
operator, so a decay channel of rate kappa stores sqrt(kappa) a^dag.
The master equation consumed downstream is written for exactly this
convention.

Rotating-frame phase factors on the L_i are dropped throughout: the
master equation is invariant under L_i -> exp(i theta) L_i, which the
test suite pins as a property.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .fock import (
    Operator,
    SpaceSignature,
    annihilation,
    identity,
    number,
    zero,
)

_HERM_TOL = 1e-12


@dataclass(frozen=True)
class SLHModel:
    """Scattering matrix, conjugate coupling operators and Hamiltonian."""

    sig: SpaceSignature
    S: tuple[tuple[Operator, ...], ...]
    L: tuple[Operator, ...]
    H: Operator

    def __post_init__(self):
        n = len(self.L)
        if n < 1:
            raise DimensionMismatch("model needs at least one channel")
        if len(self.S) != n or any(len(row) != n for row in self.S):
            raise DimensionMismatch("scattering matrix must be n x n")
        ops = [self.H] + list(self.L) + [s for row in self.S for s in row]
        for op in ops:
            if op.sig != self.sig:
                raise DimensionMismatch("all model operators must share the signature")
        if not self.H.is_hermitian(_HERM_TOL):
            raise DimensionMismatch("Hamiltonian is not hermitian within 1e-12")
        self._check_scattering_unitary()

    def _check_scattering_unitary(self):
        n = len(self.L)
        d = self.sig.dim
        eye = np.eye(d)
        for i in range(n):
            for j in range(n):
                acc = np.zeros((d, d), dtype=np.complex128)
                for k in range(n):
                    acc += self.S[i][k].mat @ self.S[j][k].mat.conj().T
                target = eye if i == j else 0.0
                if np.linalg.norm(acc - target) > 1e-10 * max(1.0, d):
                    raise DimensionMismatch("scattering matrix is not unitary")

    @property
    def n_channels(self) -> int:
        return len(self.L)


@dataclass(frozen=True)
class DriveSpec:
    """Coherent drive on one input channel; |alpha|^2 is photons per second."""

    channel: int
    alpha: complex


def _identity_scattering(sig: SpaceSignature, n: int):
    eye = identity(sig)
    zz = zero(sig)
    return tuple(
        tuple(eye if i == j else zz for j in range(n)) for i in range(n)
    )


def weyl_model(sig, n_channels: int, channel: int, alpha) -> SLHModel:
    """Pure coherent drive: scalar amplitude alpha entering one channel.

    In the conjugate convention the stored coupling is conj(alpha) times
    the identity.
    """
    sig = SpaceSignature(tuple(sig)) if not isinstance(sig, SpaceSignature) else sig
    if not 0 <= channel < n_channels:
        raise DimensionMismatch(f"channel {channel} out of range for {n_channels}")
    ls = [zero(sig) for _ in range(n_channels)]
    ls[channel] = np.conj(complex(alpha)) * identity(sig)
    return SLHModel(sig, _identity_scattering(sig, n_channels), tuple(ls), zero(sig))


def series_product(g2: SLHModel, g1: SLHModel) -> SLHModel:
    """Cascade composition: the output field of g1 drives g2.

    With couplings stored as conjugates of the jump operators, the
    composition reads

        S = S2 S1
        L_i = L2_i + sum_j L1_j (S2_ij)^dag
        H = H1 + H2 + sum_ij (L2_i S2_ij L1_j^dag - h.c.) / 2i
    """
    if g1.n_channels != g2.n_channels:
        raise DimensionMismatch(
            f"channel counts differ: {g2.n_channels} vs {g1.n_channels}"
        )
    if g1.sig != g2.sig:
        raise DimensionMismatch("series product requires a shared signature")
    n = g1.n_channels
    s = tuple(
        tuple(
            _op_sum(g2.sig, [g2.S[i][k] @ g1.S[k][j] for k in range(n)])
            for j in range(n)
        )
        for i in range(n)
    )
    ls = tuple(
        _op_sum(
            g2.sig,
            [g2.L[i]] + [g1.L[j] @ g2.S[i][j].dagger() for j in range(n)],
        )
        for i in range(n)
    )
    h = g1.H + g2.H
    for i in range(n):
        for j in range(n):
            x = (g2.L[i] @ g2.S[i][j] @ g1.L[j].dagger()).mat
            h = h + Operator(g1.sig, (x - x.conj().T) / 2j)
    return SLHModel(g1.sig, s, ls, h)


def _op_sum(sig, ops):
    acc = zero(sig)
    for op in ops:
        acc = acc + op
    return acc


def apply_coherent_drive(model: SLHModel, drive: DriveSpec) -> SLHModel:
    """Inject a coherent drive into one channel via the series product."""
    if not 0 <= drive.channel < model.n_channels:
        raise DimensionMismatch(
            f"drive channel {drive.channel} out of range for {model.n_channels}"
        )
    w = weyl_model(model.sig, model.n_channels, drive.channel, drive.alpha)
    return series_product(model, w)


def _check_rates(**rates):
    for name, value in rates.items():
        if value < 0:
            raise DimensionMismatch(f"rate {name} must be nonnegative, got {value}")


def build_kerr(delta, chi, kappa_a1, kappa_a2, dim, alpha) -> SLHModel:
    """Driven Kerr cavity: H = delta n + chi a^dag a^dag a a plus drive.

    Two decay channels (coupling rates kappa_a1, kappa_a2); the drive
    enters channel 1 through the series product, so L_1 becomes
    sqrt(kappa_a1) a^dag + conj(alpha) and H gains the matching
    (sqrt(kappa_a1)/2i)(alpha a^dag - conj(alpha) a) term.
    """
    _check_rates(kappa_a1=kappa_a1, kappa_a2=kappa_a2)
    if dim < 2:
        raise DimensionMismatch("Kerr model needs dim >= 2")
    sig = SpaceSignature((int(dim),))
    a = annihilation(sig)
    ad = a.dagger()
    n = ad @ a
    h = delta * n + chi * (ad @ ad @ a @ a)
    ls = (math.sqrt(kappa_a1) * ad, math.sqrt(kappa_a2) * ad)
    base = SLHModel(sig, _identity_scattering(sig, 2), ls, h)
    return apply_coherent_drive(base, DriveSpec(0, alpha))


def build_chi2(delta, g, kappa_a1, kappa_a2, kappa_b, alpha, dims) -> SLHModel:
    """Driven two-mode cavity with degenerate down-conversion coupling.

    Mode b sits at twice the fundamental frequency, carries detuning
    2*delta and decays through its own channel at rate kappa_b; the
    coupling is i(g/2)(a^dag a^dag b - a a b^dag).
    """
    return _build_two_mode(delta, g, 2.0 * delta, kappa_a1, kappa_a2, kappa_b, alpha, dims)


def build_chi2_dispersive(delta, g, delta_b, kappa_a1, kappa_a2, kappa_b, alpha, dims) -> SLHModel:
    """Variant of :func:`build_chi2` with a free pump detuning delta_b.

    For large g, delta_b at fixed g^2/(4 delta_b) the a-mode dynamics
    approaches a Kerr cavity with chi = -g^2/(4 delta_b).
    """
    return _build_two_mode(delta, g, delta_b, kappa_a1, kappa_a2, kappa_b, alpha, dims)


def _build_two_mode(delta, g, pump_detuning, kappa_a1, kappa_a2, kappa_b, alpha, dims):
    _check_rates(kappa_a1=kappa_a1, kappa_a2=kappa_a2, kappa_b=kappa_b)
    dims = tuple(int(d) for d in dims)
    if len(dims) != 2 or dims[0] < 2 or dims[1] < 2:
        raise DimensionMismatch(f"two-mode model needs dims [dim_a>=2, dim_b>=2], got {dims}")
    sig = SpaceSignature(dims)
    a = annihilation(sig, 0)
    b = annihilation(sig, 1)
    ad, bd = a.dagger(), b.dagger()
    h = (
        delta * (ad @ a)
        + pump_detuning * (bd @ b)
        + 0.5j * g * (ad @ ad @ b - a @ a @ bd)
    )
    ls = (
        math.sqrt(kappa_a1) * ad,
        math.sqrt(kappa_a2) * ad,
        math.sqrt(kappa_b) * bd,
    )
    base = SLHModel(sig, _identity_scattering(sig, 3), ls, h)
    return apply_coherent_drive(base, DriveSpec(0, alpha))


def build_tpa(delta, kappa_a1, kappa_a2, gamma, alpha, dim) -> SLHModel:
    """Driven cavity with two-photon absorption at rate gamma.

    The pair-loss channel stores sqrt(gamma) (a^dag)^2, which produces
    the dissipator with jump operator a a at rate gamma.
    """
    _check_rates(kappa_a1=kappa_a1, kappa_a2=kappa_a2, gamma=gamma)
    if dim < 2:
        raise DimensionMismatch("TPA model needs dim >= 2")
    sig = SpaceSignature((int(dim),))
    a = annihilation(sig)
    ad = a.dagger()
    h = delta * (ad @ a)
    ls = (
        math.sqrt(kappa_a1) * ad,
        math.sqrt(kappa_a2) * ad,
        math.sqrt(gamma) * (ad @ ad),
    )
    base = SLHModel(sig, _identity_scattering(sig, 3), ls, h)
    return apply_coherent_drive(base, DriveSpec(0, alpha))


def build_qubit_limit(delta, kappa_a1, kappa_a2, alpha) -> SLHModel:
    """Two-level limit of the strongly nonlinear driven cavity.

    Single decay channel of total rate kappa_a1 + kappa_a2 with
    sigma = |0><1|; the drive appears purely in the Hamiltonian as
    -i sqrt(kappa_a1) (alpha sigma^dag - conj(alpha) sigma), which is
    the same generator the series-product form splits between L_1 and H
    (a regression test pins the equivalence).  Rabi frequency:
    2 sqrt(kappa_a1) |alpha|.
    """
    _check_rates(kappa_a1=kappa_a1, kappa_a2=kappa_a2)
    sig = SpaceSignature((2,))
    sigma = annihilation(sig)
    sigd = sigma.dagger()
    alpha = complex(alpha)
    h = delta * (sigd @ sigma) + Operator(
        sig,
        -1j * math.sqrt(kappa_a1) * (alpha * sigd.mat - np.conj(alpha) * sigma.mat),
    )
    kappa_a = kappa_a1 + kappa_a2
    ls = (math.sqrt(kappa_a) * sigd,)
    return SLHModel(sig, _identity_scattering(sig, 1), ls, h)


def qubit_limit_series_form(delta, kappa_a1, kappa_a2, alpha) -> SLHModel:
    """Two-level model with the drive injected via the series product.

    Generates the same master equation as :func:`build_qubit_limit`:
    the dissipator cross terms of L_1 = sqrt(kappa_a1) sigma^dag +
    conj(alpha) supply the half of the drive commutator that the
    series-product Hamiltonian term omits.
    """
    _check_rates(kappa_a1=kappa_a1, kappa_a2=kappa_a2)
    sig = SpaceSignature((2,))
    sigma = annihilation(sig)
    sigd = sigma.dagger()
    h = delta * (sigd @ sigma)
    ls = (math.sqrt(kappa_a1) * sigd, math.sqrt(kappa_a2) * sigd)
    base = SLHModel(sig, _identity_scattering(sig, 2), ls, h)
    return apply_coherent_drive(base, DriveSpec(0, alpha))


def build_linear_cavity(delta, kappa_a1, kappa_a2, alpha, dim) -> SLHModel:
    """Driven linear cavity (no nonlinearity); steady photon number
    kappa_a1 |alpha|^2 / (kappa_a/2)^2 on resonance."""
    return build_kerr(delta, 0.0, kappa_a1, kappa_a2, dim, alpha)
