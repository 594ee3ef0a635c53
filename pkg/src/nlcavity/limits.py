"""Adiabatic-elimination setups and pre-limit vs limit comparisons.

Each strongly nonlinear model comes with scaling data (Y, A, F_i, the
retained-subspace projector P0, and the pseudo-inverse Ytilde of Y on
the complement) whose structural requirements are checked numerically:

    P0^2 = P0 = P0^dag
    Y P0 = P0 Y = 0
    Ytilde Y = Y Ytilde = 1 - P0
    Ytilde P0 = P0 Ytilde = 0

The limit models themselves are built directly (see
:func:`nlcavity.slh.build_qubit_limit` and :func:`nlcavity.slh.build_tpa`)
and validated against the pre-limit dynamics by trajectory comparison;
no generic limit-coefficient formula is evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .fock import Operator, SpaceSignature, annihilation, identity, projector, tensor, zero
from .master import DensityMatrix, IntegratorConfig, Trajectory, integrate
from .slh import SLHModel, build_kerr, build_qubit_limit, build_tpa


@dataclass(frozen=True)
class ScalingSetup:
    """Scaling data of one adiabatic-elimination instance."""

    y: Operator
    a_op: Operator
    f_ops: tuple[Operator, ...]
    p0: Operator
    ytilde: Operator


@dataclass(frozen=True)
class StructuralReport:
    """Scaled residuals of the four structural requirements."""

    projector_residual: float
    y_vanishes_residual: float
    inverse_residual: float
    ytilde_complement_residual: float

    @property
    def max_residual(self) -> float:
        return max(
            self.projector_residual,
            self.y_vanishes_residual,
            self.inverse_residual,
            self.ytilde_complement_residual,
        )

    def passed(self, tol: float = 1e-12) -> bool:
        return self.max_residual <= tol


def kerr_setup(chi: float, dim: int) -> ScalingSetup:
    """Scaling data for the strong-Kerr limit on a single truncated mode.

    Y = i chi (a^dag)^2 a^2, retained subspace span{|0>, |1>}, and
    Ytilde with diagonal entries -i/(m(m-1)chi) for m >= 2.
    """
    if chi == 0:
        raise DimensionMismatch("Kerr scaling needs chi != 0")
    sig = SpaceSignature((int(dim),))
    a = annihilation(sig)
    ad = a.dagger()
    y = 1j * chi * (ad @ ad @ a @ a)
    m = np.arange(dim)
    diag = np.zeros(dim, dtype=np.complex128)
    diag[2:] = -1j / (m[2:] * (m[2:] - 1) * chi)
    return ScalingSetup(
        y=y,
        a_op=zero(sig),
        f_ops=(zero(sig), zero(sig)),
        p0=projector(sig, [(0,), (1,)]),
        ytilde=Operator(sig, np.diag(diag)),
    )


def chi2_setup(kappa_b: float, dims, g: float = 0.0) -> ScalingSetup:
    """Scaling data for eliminating the heavily damped pump mode.

    Y = -(kappa_b/2) b^dag b, retained subspace = (a mode) x |0_b>, and
    Ytilde diagonal in the pump number with entries -2/(m_b kappa_b).
    The interaction A = (g/2)(a a b^dag - a^dag a^dag b) scales with the
    coupling and is supplied through `g`.
    """
    if kappa_b <= 0:
        raise DimensionMismatch("pump elimination needs kappa_b > 0")
    dims = tuple(int(d) for d in dims)
    if len(dims) != 2:
        raise DimensionMismatch("two-mode scaling needs dims [dim_a, dim_b]")
    sig = SpaceSignature(dims)
    dim_a, dim_b = dims
    a = annihilation(sig, 0)
    b = annihilation(sig, 1)
    ad, bd = a.dagger(), b.dagger()
    y = -0.5 * kappa_b * (bd @ b)
    a_op = 0.5 * g * (a @ a @ bd - ad @ ad @ b)
    mb = np.arange(dim_b)
    ydiag = np.zeros(dim_b, dtype=np.complex128)
    ydiag[1:] = -2.0 / (mb[1:] * kappa_b)
    eye_a = identity(SpaceSignature((dim_a,)))
    ytilde = tensor(eye_a, Operator(SpaceSignature((dim_b,)), np.diag(ydiag)))
    p0 = tensor(eye_a, projector(SpaceSignature((dim_b,)), [(0,)]))
    return ScalingSetup(
        y=y,
        a_op=a_op,
        f_ops=(zero(sig), zero(sig), math.sqrt(kappa_b) * bd),
        p0=p0,
        ytilde=ytilde,
    )


def tpa_setup(gamma: float, dim: int) -> ScalingSetup:
    """Scaling data for the strong two-photon-absorption limit.

    Y = -(gamma/2) (a^dag)^2 a^2, F_3 = sqrt(gamma) (a^dag)^2, retained
    subspace span{|0>, |1>}, Ytilde entries -2/(m(m-1)gamma) for m >= 2.
    """
    if gamma <= 0:
        raise DimensionMismatch("TPA scaling needs gamma > 0")
    sig = SpaceSignature((int(dim),))
    a = annihilation(sig)
    ad = a.dagger()
    y = -0.5 * gamma * (ad @ ad @ a @ a)
    m = np.arange(dim)
    diag = np.zeros(dim, dtype=np.complex128)
    diag[2:] = -2.0 / (m[2:] * (m[2:] - 1) * gamma)
    return ScalingSetup(
        y=y,
        a_op=zero(sig),
        f_ops=(zero(sig), zero(sig), math.sqrt(gamma) * (ad @ ad)),
        p0=projector(sig, [(0,), (1,)]),
        ytilde=Operator(sig, np.diag(diag)),
    )


def verify_structural(setup: ScalingSetup) -> StructuralReport:
    """Numerically check the four structural requirements of a setup."""
    p = setup.p0.mat
    y = setup.y.mat
    yt = setup.ytilde.mat
    eye = np.eye(p.shape[0])

    def rel(x, scale):
        return float(np.linalg.norm(x) / max(1.0, scale))

    ny = np.linalg.norm(y)
    nyt = np.linalg.norm(yt)
    proj = max(rel(p @ p - p, 1.0), rel(p - p.conj().T, 1.0))
    yvan = max(rel(y @ p, ny), rel(p @ y, ny))
    comp = eye - p
    inv = max(rel(yt @ y - comp, 1.0), rel(y @ yt - comp, 1.0))
    ytp = max(rel(yt @ p, nyt), rel(p @ yt, nyt))
    return StructuralReport(proj, yvan, inv, ytp)


_OBSERVABLES = ("pop0", "pop1", "leakage", "n_expect")


def observable_series(traj: Trajectory, name: str) -> np.ndarray:
    """A named observable record, shared across spaces of any mode count."""
    if name not in _OBSERVABLES:
        raise DimensionMismatch(f"unknown observable {name!r}; pick from {_OBSERVABLES}")
    return traj.series(name)


@dataclass(frozen=True)
class ComparisonResult:
    times: np.ndarray
    observable: str
    pre_series: np.ndarray
    limit_series: np.ndarray
    deviation: float
    pre_trajectory: Trajectory
    limit_trajectory: Trajectory


def compare_prelimit_limit(
    pre_model: SLHModel,
    limit_model: SLHModel,
    observable: str,
    config: IntegratorConfig,
    rho0_pre: DensityMatrix | None = None,
    rho0_limit: DensityMatrix | None = None,
) -> ComparisonResult:
    """Sup-norm deviation of an observable between two models on a shared grid."""
    rho0_pre = rho0_pre if rho0_pre is not None else DensityMatrix.vacuum(pre_model.sig)
    rho0_limit = (
        rho0_limit if rho0_limit is not None else DensityMatrix.vacuum(limit_model.sig)
    )
    traj_pre = integrate(pre_model, rho0_pre, config)
    traj_limit = integrate(limit_model, rho0_limit, config)
    s_pre = observable_series(traj_pre, observable)
    s_limit = observable_series(traj_limit, observable)
    deviation = float(np.abs(s_pre - s_limit).max())
    return ComparisonResult(
        times=traj_pre.times,
        observable=observable,
        pre_series=s_pre,
        limit_series=s_limit,
        deviation=deviation,
        pre_trajectory=traj_pre,
        limit_trajectory=traj_limit,
    )


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-parameter deviations from the limit model, with leakage."""

    parameter: str
    values: tuple[float, ...]
    deviations: tuple[float, ...]
    max_leakages: tuple[float, ...]

    @property
    def deviations_nonincreasing(self) -> bool:
        return all(b <= a * (1 + 1e-12) for a, b in zip(self.deviations, self.deviations[1:]))


def convergence_sweep(
    family: str,
    values,
    observable: str,
    base_params: dict,
    config: IntegratorConfig,
    dims_per_value=None,
) -> ConvergenceReport:
    """Deviation from the driven two-level limit across nonlinearity values.

    `family` is "kerr" (swept chi) or "tpa" (swept gamma); base_params
    carries delta, kappa_a1, kappa_a2, alpha and a default `dims` entry
    that `dims_per_value` can override per sweep point.
    """
    if family not in ("kerr", "tpa"):
        raise DimensionMismatch(f"unknown sweep family {family!r}")
    delta = base_params.get("delta", 0.0)
    ka1 = base_params["kappa_a1"]
    ka2 = base_params.get("kappa_a2", 0.0)
    alpha = base_params["alpha"]
    limit_model = build_qubit_limit(delta, ka1, ka2, alpha)
    deviations = []
    leakages = []
    values = tuple(float(v) for v in values)
    for i, v in enumerate(values):
        dims = (
            tuple(dims_per_value[i])
            if dims_per_value is not None
            else tuple(base_params["dims"])
        )
        if family == "kerr":
            pre = build_kerr(delta, v, ka1, ka2, dims[0], alpha)
        else:
            pre = build_tpa(delta, ka1, ka2, v, alpha, dims[0])
        res = compare_prelimit_limit(pre, limit_model, observable, config)
        deviations.append(res.deviation)
        leakages.append(float(res.pre_trajectory.series("leakage").max()))
    return ConvergenceReport(
        parameter="chi" if family == "kerr" else "gamma",
        values=values,
        deviations=tuple(deviations),
        max_leakages=tuple(leakages),
    )


def oscillation_count(times: np.ndarray, values: np.ndarray, prominence: float = 1e-3) -> int:
    """Number of strict interior local maxima, ignoring ripples whose
    prominence is below `prominence` times the series range.

    The default floor separates genuine Rabi oscillations (relative
    prominence above ~0.5 in the scenarios here) from settling ripples
    of an overdamped approach (~1e-5)."""
    v = np.asarray(values, dtype=np.float64)
    if len(v) < 3:
        return 0
    vrange = float(v.max() - v.min())
    if vrange == 0.0:
        return 0
    floor = prominence * vrange
    count = 0
    for i in range(1, len(v) - 1):
        if v[i] > v[i - 1] and v[i] > v[i + 1]:
            left_min = v[: i].min()
            right_min = v[i + 1 :].min()
            if v[i] - max(left_min, right_min) > floor:
                count += 1
    return count
