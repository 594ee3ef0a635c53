"""Dense operator algebra on truncated Fock spaces.

Single- and two-mode spaces are represented by a :class:`SpaceSignature`
holding per-mode truncation dimensions.  Operators are dense complex
matrices tagged with their signature; any binary operation checks that
the signatures agree.

Truncation convention: the annihilation matrix is the exact top-left
block of the infinite matrix.  No boundary corrections are applied;
truncation adequacy is a caller concern (checked downstream via the
population of the top Fock levels).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import DimensionMismatch


@dataclass(frozen=True)
class SpaceSignature:
    """Ordered per-mode truncation dimensions of a tensor-product Fock space."""

    mode_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.mode_dims)
        if not dims or any(d < 1 for d in dims):
            raise DimensionMismatch(f"invalid mode dimensions {self.mode_dims!r}")
        object.__setattr__(self, "mode_dims", dims)

    @property
    def dim(self) -> int:
        """Total Hilbert-space dimension (product of mode dims)."""
        out = 1
        for d in self.mode_dims:
            out *= d
        return out

    @property
    def n_modes(self) -> int:
        return len(self.mode_dims)

    def index_of(self, occupations) -> int:
        """Flat basis index of |n_0 n_1 ...> (mode 0 is the slowest index)."""
        occs = tuple(int(n) for n in occupations)
        if len(occs) != self.n_modes:
            raise DimensionMismatch(
                f"expected {self.n_modes} occupation numbers, got {len(occs)}"
            )
        idx = 0
        for n, d in zip(occs, self.mode_dims):
            if not 0 <= n < d:
                raise DimensionMismatch(f"occupation {n} outside mode of dimension {d}")
            idx = idx * d + n
        return idx


def _as_signature(sig) -> SpaceSignature:
    if isinstance(sig, SpaceSignature):
        return sig
    return SpaceSignature(tuple(sig))


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense operator on a truncated Fock space."""

    sig: SpaceSignature
    mat: np.ndarray

    def __post_init__(self):
        mat = np.ascontiguousarray(self.mat, dtype=np.complex128)
        d = self.sig.dim
        if mat.shape != (d, d):
            raise DimensionMismatch(
                f"matrix shape {mat.shape} does not match signature dimension {d}"
            )
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    def dagger(self) -> Operator:
        return Operator(self.sig, self.mat.conj().T)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        scale = max(1.0, np.linalg.norm(self.mat))
        return np.linalg.norm(self.mat - self.mat.conj().T) <= tol * scale

    def norm(self) -> float:
        return float(np.linalg.norm(self.mat))

    def _check(self, other: Operator):
        if self.sig != other.sig:
            raise DimensionMismatch(
                f"signature mismatch: {self.sig.mode_dims} vs {other.sig.mode_dims}"
            )

    def __add__(self, other: Operator) -> Operator:
        self._check(other)
        return Operator(self.sig, self.mat + other.mat)

    def __sub__(self, other: Operator) -> Operator:
        self._check(other)
        return Operator(self.sig, self.mat - other.mat)

    def __neg__(self) -> Operator:
        return Operator(self.sig, -self.mat)

    def __mul__(self, scalar) -> Operator:
        return Operator(self.sig, self.mat * complex(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other: Operator) -> Operator:
        self._check(other)
        return Operator(self.sig, self.mat @ other.mat)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Unit-norm pure state on a truncated Fock space."""

    sig: SpaceSignature
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.sig.dim,):
            raise DimensionMismatch(
                f"amplitude length {amps.shape} does not match dimension {self.sig.dim}"
            )
        nrm = np.linalg.norm(amps)
        if abs(nrm - 1.0) > 1e-12:
            raise DimensionMismatch(f"state norm {nrm} differs from 1 beyond 1e-12")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def expectation(self, op: Operator) -> complex:
        if op.sig != self.sig:
            raise DimensionMismatch("operator and state signatures differ")
        return complex(np.vdot(self.amplitudes, op.mat @ self.amplitudes))


def _embed(sig: SpaceSignature, block: np.ndarray, mode_index: int) -> np.ndarray:
    """Kronecker-embed a single-mode matrix at the given mode position."""
    out = np.eye(1, dtype=np.complex128)
    for m, d in enumerate(sig.mode_dims):
        factor = block if m == mode_index else np.eye(d, dtype=np.complex128)
        out = np.kron(out, factor)
    return out


def _check_mode(sig: SpaceSignature, mode_index: int, min_dim: int = 1):
    if not 0 <= mode_index < sig.n_modes:
        raise DimensionMismatch(
            f"mode index {mode_index} invalid for {sig.n_modes}-mode space"
        )
    if sig.mode_dims[mode_index] < min_dim:
        raise DimensionMismatch(
            f"mode {mode_index} needs dimension >= {min_dim}, has {sig.mode_dims[mode_index]}"
        )


def annihilation(sig, mode_index: int = 0) -> Operator:
    """Annihilation operator of the selected mode, <m-1|a|m> = sqrt(m)."""
    sig = _as_signature(sig)
    _check_mode(sig, mode_index, min_dim=2)
    d = sig.mode_dims[mode_index]
    block = np.diag(np.sqrt(np.arange(1, d, dtype=np.float64)), k=1).astype(np.complex128)
    return Operator(sig, _embed(sig, block, mode_index))


def creation(sig, mode_index: int = 0) -> Operator:
    """Creation operator, the dagger of :func:`annihilation`."""
    return annihilation(sig, mode_index).dagger()


def number(sig, mode_index: int = 0) -> Operator:
    """Photon number operator a^dag a of the selected mode."""
    a = annihilation(sig, mode_index)
    return a.dagger() @ a


def identity(sig) -> Operator:
    sig = _as_signature(sig)
    return Operator(sig, np.eye(sig.dim, dtype=np.complex128))


def zero(sig) -> Operator:
    sig = _as_signature(sig)
    return Operator(sig, np.zeros((sig.dim, sig.dim), dtype=np.complex128))


def dagger(op: Operator) -> Operator:
    return op.dagger()


def commutator(x: Operator, y: Operator) -> Operator:
    return x @ y - y @ x


def tensor(x: Operator, y: Operator) -> Operator:
    """Tensor product; the combined signature concatenates the mode lists."""
    sig = SpaceSignature(x.sig.mode_dims + y.sig.mode_dims)
    return Operator(sig, np.kron(x.mat, y.mat))


def projector(sig, occupations_list) -> Operator:
    """Orthogonal projector onto the span of the listed Fock states."""
    sig = _as_signature(sig)
    mat = np.zeros((sig.dim, sig.dim), dtype=np.complex128)
    for occs in occupations_list:
        i = sig.index_of(occs)
        mat[i, i] = 1.0
    return Operator(sig, mat)


def fock_state(sig, occupations) -> StateVector:
    """Basis state |n_0 n_1 ...>."""
    sig = _as_signature(sig)
    amps = np.zeros(sig.dim, dtype=np.complex128)
    amps[sig.index_of(occupations)] = 1.0
    return StateVector(sig, amps)


def coherent_state(dim: int, beta) -> StateVector:
    """Truncated coherent state, amplitudes beta^m / sqrt(m!), renormalized."""
    sig = SpaceSignature((int(dim),))
    m = np.arange(dim)
    # log-domain to stay finite for |beta| up to ~sqrt(dim)
    if beta == 0:
        amps = np.zeros(dim, dtype=np.complex128)
        amps[0] = 1.0
        return StateVector(sig, amps)
    from scipy.special import gammaln

    logmag = m * np.log(abs(complex(beta))) - 0.5 * gammaln(m + 1)
    phase = np.exp(1j * m * np.angle(complex(beta)))
    amps = np.exp(logmag) * phase
    amps /= np.linalg.norm(amps)
    return StateVector(sig, amps)


def displacement_operator(dim: int, beta) -> Operator:
    """Displacement exp(beta a^dag - conj(beta) a) on a single truncated mode."""
    sig = SpaceSignature((int(dim),))
    a = annihilation(sig).mat
    gen = complex(beta) * a.conj().T - np.conj(complex(beta)) * a
    return Operator(sig, expm(gen))


def parity_operator(dim: int) -> Operator:
    """Photon-number parity, diag((-1)^m)."""
    sig = SpaceSignature((int(dim),))
    return Operator(sig, np.diag((-1.0 + 0j) ** np.arange(dim)))
