"""Master-equation evolution, steady states and observables.

The equation of motion uses the conjugate coupling convention of
:mod:`nlcavity.slh`:

    drho/dt = -i[H, rho] + sum_i ( L_i^dag rho L_i
                                   - 1/2 L_i L_i^dag rho
                                   - 1/2 rho L_i L_i^dag ).

Writing C_i = L_i^dag (the usual jump operators) this is the standard
Lindblad form, which is what the propagation kernels consume.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import _backend
from .errors import DimensionMismatch, InvariantViolation, NumericalError
from .fock import Operator, SpaceSignature, StateVector, projector
from .slh import SLHModel

_METHODS = ("adaptive-RK45", "fixed-RK4")


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite state."""

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

    def validate(self, herm_tol=1e-10, trace_tol=1e-8, eig_floor=-1e-8):
        herm = np.linalg.norm(self.mat - self.mat.conj().T)
        if herm > herm_tol * max(1.0, np.linalg.norm(self.mat)):
            raise InvariantViolation(f"density matrix not hermitian: residual {herm:.3e}")
        tr = self.mat.trace()
        if abs(tr - 1.0) > trace_tol:
            raise InvariantViolation(f"density matrix trace {tr} is not 1 within {trace_tol}")
        w = np.linalg.eigvalsh(self.mat)
        if w[0] < eig_floor:
            raise InvariantViolation(f"density matrix min eigenvalue {w[0]:.3e} below {eig_floor}")
        return self

    @classmethod
    def vacuum(cls, sig) -> DensityMatrix:
        sig = sig if isinstance(sig, SpaceSignature) else SpaceSignature(tuple(sig))
        mat = np.zeros((sig.dim, sig.dim), dtype=np.complex128)
        mat[0, 0] = 1.0
        return cls(sig, mat)

    @classmethod
    def from_state(cls, psi: StateVector) -> DensityMatrix:
        return cls(psi.sig, np.outer(psi.amplitudes, psi.amplitudes.conj()))


@dataclass(frozen=True)
class IntegratorConfig:
    """Time stepping parameters; `dt` is only used by fixed-RK4."""

    t_end: float
    method: str = "adaptive-RK45"
    rtol: float = 1e-8
    atol: float = 1e-10
    dt: float = 1e-3
    grid_points: int = 401
    checkpoint_stride: int = 0

    def __post_init__(self):
        if self.method not in _METHODS:
            raise DimensionMismatch(f"unknown integrator method {self.method!r}")
        if self.t_end <= 0 or self.dt <= 0 or self.rtol <= 0 or self.atol < 0:
            raise DimensionMismatch("integrator tolerances, dt and t_end must be positive")
        if self.grid_points < 2:
            raise DimensionMismatch("need at least two grid points")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.grid_points)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time grid plus per-time observable records."""

    sig: SpaceSignature
    times: np.ndarray
    records: dict
    pop_labels: tuple[str, str]
    mode_populations: tuple[np.ndarray, ...]
    checkpoints: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    def series(self, name: str) -> np.ndarray:
        if name not in self.records:
            raise KeyError(f"no record {name!r}; have {sorted(self.records)}")
        return self.records[name]

    def state_at(self, index: int) -> DensityMatrix:
        if index not in self.checkpoints:
            raise KeyError(f"no stored state at grid index {index}")
        return DensityMatrix(self.sig, self.checkpoints[index])

    @property
    def final_state(self) -> DensityMatrix:
        return self.state_at(len(self.times) - 1)


def jump_operators(model: SLHModel) -> np.ndarray:
    """Stack of the usual jump operators C_i = L_i^dag, zero channels dropped."""
    d = model.sig.dim
    mats = [l.mat.conj().T for l in model.L if np.linalg.norm(l.mat) > 0.0]
    if not mats:
        return np.zeros((0, d, d), dtype=np.complex128)
    return np.stack(mats)


def drift_matrix(model: SLHModel) -> np.ndarray:
    """G = -iH - 1/2 sum_i C_i^dag C_i, so drho/dt = G rho + rho G^dag + sum C rho C^dag."""
    g = -1j * model.H.mat.copy()
    for c in jump_operators(model):
        g -= 0.5 * (c.conj().T @ c)
    return g


def liouvillian_apply(model: SLHModel, rho) -> np.ndarray:
    """Right-hand side of the master equation for a single state."""
    mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)
    if isinstance(rho, DensityMatrix) and rho.sig != model.sig:
        raise DimensionMismatch("model and state signatures differ")
    if mat.shape != (model.sig.dim, model.sig.dim):
        raise DimensionMismatch(f"state shape {mat.shape} does not match model")
    h = model.H.mat
    out = -1j * (h @ mat - mat @ h)
    for l in model.L:
        lm = l.mat
        lld = lm @ lm.conj().T
        out += lm.conj().T @ mat @ lm - 0.5 * (lld @ mat + mat @ lld)
    return out


def liouvillian_matrix(model: SLHModel) -> np.ndarray:
    """Dense superoperator on row-major vectorized states (d^2 x d^2)."""
    d = model.sig.dim
    eye = np.eye(d)
    h = model.H.mat
    m = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for c in jump_operators(model):
        cdc = c.conj().T @ c
        m += np.kron(c, c.conj())
        m -= 0.5 * (np.kron(cdc, eye) + np.kron(eye, cdc.T))
    return m


def _pop_labels(sig: SpaceSignature) -> tuple[str, str]:
    if sig.n_modes == 1:
        return ("pop0", "pop1")
    return ("pop0a0b", "pop1a0b")


def integrate(model: SLHModel, rho0: DensityMatrix, config: IntegratorConfig) -> Trajectory:
    """Evolve rho0 under the model's master equation.

    Hermiticity is enforced by symmetrization after every accepted step;
    trace drift is recorded, never renormalized away.  A trace error
    beyond 100x the per-unit-time budget aborts with a diagnostic.
    """
    if rho0.sig != model.sig:
        raise DimensionMismatch("model and initial state signatures differ")
    rho0.validate()
    g = drift_matrix(model)
    cs = jump_operators(model)
    t_grid = config.times
    if config.method == "adaptive-RK45":
        states, info = _backend.propagate_rk45(
            g, cs, rho0.mat, t_grid, config.rtol, config.atol
        )
    else:
        states, info = _backend.propagate_rk4(g, cs, rho0.mat, t_grid, config.dt)

    diag = np.einsum("tii->ti", states).real
    trace = diag.sum(axis=1)
    trace_err = np.abs(trace - 1.0)
    max_err = float(trace_err.max())
    budget = 1e-8 * max(1.0, config.t_end)
    if max_err > 100.0 * budget:
        raise InvariantViolation(
            f"trace drift {max_err:.3e} exceeds 100x budget {budget:.3e}; "
            f"method={config.method}, steps={info.get('n_steps')}"
        )
    if not np.all(np.isfinite(states.view(np.float64))):
        raise NumericalError("non-finite state encountered during integration")

    dims = model.sig.mode_dims
    resh = diag.reshape((len(t_grid),) + dims)
    marginals = []
    for m in range(len(dims)):
        axes = tuple(1 + k for k in range(len(dims)) if k != m)
        marginals.append(resh.sum(axis=axes) if axes else resh.copy())

    pop0 = diag[:, model.sig.index_of((0,) * len(dims))]
    pop1 = diag[:, model.sig.index_of((1,) + (0,) * (len(dims) - 1))]
    n_expect = marginals[0] @ np.arange(dims[0], dtype=np.float64)
    records = {
        "pop0": pop0,
        "pop1": pop1,
        "leakage": trace - pop0 - pop1,
        "n_expect": n_expect,
        "trace_err": trace_err,
    }

    min_eig = min(
        float(np.linalg.eigvalsh(states[k])[0]) for k in range(len(t_grid))
    )
    info = dict(info)
    info.update(
        backend=_backend.backend_name(),
        method=config.method,
        max_trace_err=max_err,
        trace_drift_rate=max_err / max(1.0, config.t_end),
        min_eigenvalue=min_eig,
    )

    checkpoints = {}
    if config.checkpoint_stride > 0:
        for k in range(0, len(t_grid), config.checkpoint_stride):
            checkpoints[k] = states[k].copy()
    checkpoints[len(t_grid) - 1] = states[len(t_grid) - 1].copy()

    return Trajectory(
        sig=model.sig,
        times=t_grid,
        records=records,
        pop_labels=_pop_labels(model.sig),
        mode_populations=tuple(marginals),
        checkpoints=checkpoints,
        info=info,
    )


def expectation(rho: DensityMatrix, x: Operator) -> complex:
    if rho.sig != x.sig:
        raise DimensionMismatch("state and operator signatures differ")
    return complex(np.trace(rho.mat @ x.mat))


def populations(rho: DensityMatrix, basis_labels) -> np.ndarray:
    """Diagonal matrix elements <occ|rho|occ> for each occupation tuple."""
    idx = [rho.sig.index_of(occ) for occ in basis_labels]
    return np.real(np.diag(rho.mat)[idx])


def qubit_projector(sig) -> Operator:
    """Projector onto span{|0...0>, |1 0...0>} of mode 0."""
    sig = sig if isinstance(sig, SpaceSignature) else SpaceSignature(tuple(sig))
    zeros = (0,) * (sig.n_modes - 1)
    return projector(sig, [(0,) + zeros, (1,) + zeros])


def leakage(rho: DensityMatrix, qubit_proj: Operator | None = None) -> float:
    """1 - Tr[P rho P] with P the (default) qubit-subspace projector."""
    p = qubit_proj if qubit_proj is not None else qubit_projector(rho.sig)
    if p.sig != rho.sig:
        raise DimensionMismatch("projector and state signatures differ")
    return float(1.0 - np.real(np.trace(p.mat @ rho.mat @ p.mat)))


def truncation_check(traj: Trajectory, top_k: int = 3) -> float:
    """Largest population found in the top Fock levels of any mode.

    The qubit subspace {0, 1} is never counted as a truncation boundary,
    so a 2-dimensional mode reports 0 by construction.
    """
    worst = 0.0
    for marg in traj.mode_populations:
        dim = marg.shape[1]
        lo = max(dim - top_k, 2)
        if lo >= dim:
            continue
        worst = max(worst, float(marg[:, lo:].sum(axis=1).max()))
    return worst


def steady_state(model: SLHModel, dense_limit: int = 64) -> DensityMatrix:
    """Null vector of the vectorized generator, hermitized and normalized.

    A rank-revealing factorization (SVD up to d^2 = 2500, column-pivoted
    QR above, which is cheaper at the largest sizes used here) detects a
    degenerate null space, reported as an error with its multiplicity.
    The state itself comes from the trace-constrained direct solve,
    whose conditioning tracks the generator's norm-to-gap ratio rather
    than the factorization's absolute singular-value resolution.
    """
    d = model.sig.dim
    if d > dense_limit:
        raise NumericalError(
            f"dimension {d} exceeds dense steady-state limit {dense_limit}"
        )
    m = liouvillian_matrix(model)
    n = m.shape[0]
    if n <= 2500:
        s = sla.svd(m, compute_uv=False)
        small = s < 1e-10 * s[0]
    else:
        r = sla.qr(m, mode="r", pivoting=True)[0]
        rdiag = np.abs(np.diag(r))
        small = rdiag < 1e-10 * rdiag[0]
    multiplicity = int(np.sum(small))
    if multiplicity > 1:
        raise NumericalError(
            f"degenerate steady state: null space multiplicity {multiplicity}"
        )

    # replace one (linearly dependent) row with the trace constraint
    a = m.copy()
    trace_row = np.zeros(n, dtype=np.complex128)
    trace_row[:: d + 1] = 1.0
    a[0] = trace_row
    b = np.zeros(n, dtype=np.complex128)
    b[0] = 1.0
    vec = sla.solve(a, b)

    rho = vec.reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    tr = rho.trace().real
    if abs(tr) < 1e-10 * np.linalg.norm(rho):
        raise NumericalError("steady-state candidate has (numerically) zero trace")
    rho = rho / tr
    residual = np.linalg.norm(m @ rho.reshape(n))
    if residual > 1e-9 * np.linalg.norm(m):
        raise NumericalError(
            f"steady-state residual {residual:.3e} above 1e-9 of generator norm"
        )
    return DensityMatrix(model.sig, rho)
