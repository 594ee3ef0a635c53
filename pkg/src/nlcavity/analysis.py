"""Phase-space and non-Gaussianity analysis of single-mode states.

Conventions (pinned by the trivial-value tests):

* quadratures x = (a + a^dag)/sqrt(2), p = (a - a^dag)/(i sqrt(2));
* vacuum covariance = I/2, symplectic eigenvalue nu = 2 sqrt(det sigma);
* all entropies in nats.

The Wigner function is evaluated point-wise through the displaced
parity operator, W(alpha) = (2/pi) Tr[rho D(alpha) P D(alpha)^dag] with
alpha = (x + ip)/sqrt(2).  Displacements along the x and p axes are
generated from two cached eigendecompositions and combined per grid
point with a single matrix product; the relative phase of the split
cancels inside the similarity transform.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NumericalError
from .fock import SpaceSignature, annihilation
from .master import DensityMatrix

TOP_LEVEL_TOL = 1e-6


def reduce_to_mode(rho: DensityMatrix, mode_index: int) -> DensityMatrix:
    """Partial trace onto a single mode."""
    dims = rho.sig.mode_dims
    n = len(dims)
    if not 0 <= mode_index < n:
        raise DimensionMismatch(f"mode index {mode_index} invalid for {n}-mode state")
    t = rho.mat.reshape(dims + dims)
    kept = list(range(n))
    for m in sorted((k for k in range(n) if k != mode_index), reverse=True):
        pos = kept.index(m)
        t = np.trace(t, axis1=pos, axis2=pos + len(kept))
        kept.remove(m)
    return DensityMatrix(SpaceSignature((dims[mode_index],)), t)


def _require_single_mode(rho: DensityMatrix) -> int:
    if rho.sig.n_modes != 1:
        raise DimensionMismatch(
            f"single-mode state required, got {rho.sig.n_modes} modes"
        )
    return rho.sig.dim


@dataclass(frozen=True, eq=False)
class WignerGrid:
    """Wigner values on a rectangular (x, p) grid; values[i, j] = W(xs[i], ps[j])."""

    xs: np.ndarray
    ps: np.ndarray
    values: np.ndarray
    truncation_flagged: bool = False

    def integral(self) -> float:
        """Grid sum times cell area; approximates the state trace.

        The area element is d^2 alpha = dx dp / 2, matching the
        normalization that puts the vacuum peak at 2/pi.
        """
        dx = self.xs[1] - self.xs[0] if len(self.xs) > 1 else 1.0
        dp = self.ps[1] - self.ps[0] if len(self.ps) > 1 else 1.0
        return float(self.values.sum() * dx * dp / 2.0)

    def minimum(self) -> float:
        return float(self.values.min())


def _axis_generators(dim: int):
    """Eigendecompositions generating x- and p-axis displacements.

    exp(r(a^dag - a)) = V1 exp(-i r w1) V1^dag   (real displacement r)
    exp(i s(a^dag + a)) = V2 exp(i s w2) V2^dag  (imaginary displacement is)
    """
    a = annihilation(SpaceSignature((dim,))).mat
    w1, v1 = np.linalg.eigh(1j * (a.conj().T - a))
    w2, v2 = np.linalg.eigh(a.conj().T + a)
    return (w1, v1), (w2, v2)


def wigner(rho: DensityMatrix, xs, ps) -> WignerGrid:
    """Displaced-parity Wigner function of a single-mode state.

    The state is zero-padded before displacing so that the largest grid
    amplitude stays well inside the working truncation; displaced parity
    degrades once |alpha|^2 approaches the dimension.
    """
    dim = _require_single_mode(rho)
    xs = np.asarray(xs, dtype=np.float64)
    ps = np.asarray(ps, dtype=np.float64)
    if xs.ndim != 1 or ps.ndim != 1 or len(xs) == 0 or len(ps) == 0:
        raise DimensionMismatch("xs and ps must be nonempty 1-d grids")
    top = abs(rho.mat[dim - 1, dim - 1])
    flagged = bool(top > TOP_LEVEL_TOL)
    if flagged:
        warnings.warn(
            f"top Fock level holds population {top:.2e}; Wigner values may be "
            "truncation-limited",
            stacklevel=2,
        )
    amax_sq = 0.5 * (max(abs(xs.min()), abs(xs.max())) ** 2
                     + max(abs(ps.min()), abs(ps.max())) ** 2)
    pad = max(dim, int(math.ceil(amax_sq + 5.0 * math.sqrt(amax_sq) + 10.0)))
    rho_m = np.zeros((pad, pad), dtype=np.complex128)
    rho_m[:dim, :dim] = rho.mat
    dim = pad
    (w1, v1), (w2, v2) = _axis_generators(dim)
    # p-axis displacement stack, one matrix per grid row
    phases_p = np.exp(1j * (ps[:, None] / math.sqrt(2.0)) * w2[None, :])
    dp_stack = np.einsum("nm,km,lm->knl", v2, phases_p, v2.conj())
    signs = (-1.0) ** np.arange(dim)
    values = np.empty((len(xs), len(ps)), dtype=np.float64)
    for i, x in enumerate(xs):
        dx = (v1 * np.exp(-1j * (x / math.sqrt(2.0)) * w1)) @ v1.conj().T
        d_full = dx[None, :, :] @ dp_stack
        y = rho_m[None, :, :] @ d_full
        values[i, :] = (2.0 / math.pi) * np.real(
            np.einsum("knm,knm,m->k", d_full.conj(), y, signs)
        )
    return WignerGrid(xs=xs, ps=ps, values=values, truncation_flagged=flagged)


def wigner_min(rho: DensityMatrix, xs, ps) -> float:
    """Minimum Wigner value over the grid (negative certifies nonclassicality)."""
    return wigner(rho, xs, ps).minimum()


_OMEGA = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True, eq=False)
class MomentSet:
    """First and second moments with the derived quadrature covariance."""

    mean: complex
    a_squared: complex
    n_photon: float
    sigma: np.ndarray

    def uncertainty_defect(self) -> float:
        """Most negative eigenvalue of sigma + (i/2) Omega (>= 0 is physical)."""
        h = self.sigma + 0.5j * _OMEGA
        return float(np.linalg.eigvalsh(h)[0])


def moments(rho: DensityMatrix) -> MomentSet:
    """Field moments <a>, <a^2>, <a^dag a> and the 2x2 covariance."""
    dim = _require_single_mode(rho)
    a = annihilation(SpaceSignature((dim,))).mat
    mean = complex(np.trace(rho.mat @ a))
    a2 = complex(np.trace(rho.mat @ (a @ a)))
    n = float(np.real(np.trace(rho.mat @ (a.conj().T @ a))))
    xbar = math.sqrt(2.0) * mean.real
    pbar = math.sqrt(2.0) * mean.imag
    sxx = a2.real + n + 0.5 - xbar**2
    spp = -a2.real + n + 0.5 - pbar**2
    sxp = a2.imag - xbar * pbar
    sigma = np.array([[sxx, sxp], [sxp, spp]])
    ms = MomentSet(mean=mean, a_squared=a2, n_photon=n, sigma=sigma)
    if ms.uncertainty_defect() < -1e-8:
        warnings.warn(
            f"covariance violates the uncertainty relation by {ms.uncertainty_defect():.2e}",
            stacklevel=2,
        )
    return ms


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """-sum p ln p over eigenvalues above 1e-14 (nats)."""
    w = np.linalg.eigvalsh(rho.mat)
    w = w[w > 1e-14]
    return float(-(w * np.log(w)).sum())


def gaussian_reference_entropy(ms: MomentSet, nu_tol: float = 1e-6) -> float:
    """Entropy of the Gaussian state with covariance ms.sigma.

    nu = 2 sqrt(det sigma); values slightly below 1 (rounding) clamp to
    1, values below 1 - nu_tol abort as a non-physical covariance.
    """
    det = float(np.linalg.det(ms.sigma))
    nu = 2.0 * math.sqrt(max(det, 0.0))
    if nu < 1.0 - nu_tol:
        raise NumericalError(
            f"symplectic eigenvalue {nu:.8f} below 1: covariance is not physical"
        )
    nu = max(nu, 1.0)
    if nu == 1.0:
        return 0.0
    up = (nu + 1.0) / 2.0
    dn = (nu - 1.0) / 2.0
    return up * math.log(up) - (dn * math.log(dn) if dn > 0.0 else 0.0)


def delta_b(rho: DensityMatrix) -> float:
    """Relative-entropy non-Gaussianity: S(tau) - S(rho), with tau the
    Gaussian state sharing rho's first and second moments."""
    ms = moments(rho)
    return gaussian_reference_entropy(ms) - von_neumann_entropy(rho)


@dataclass(frozen=True)
class PeakResult:
    t_peak: float
    value: float
    interior: bool


def peak_find(times, values) -> PeakResult:
    """Largest value of a time trace with parabolic sub-grid refinement.

    A maximum at either endpoint is flagged as non-interior and returned
    without refinement.
    """
    t = np.asarray(times, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if t.shape != v.shape or t.ndim != 1 or len(t) == 0:
        raise DimensionMismatch("times and values must be matching 1-d arrays")
    i = int(np.argmax(v))
    if i == 0 or i == len(v) - 1:
        return PeakResult(t_peak=float(t[i]), value=float(v[i]), interior=False)
    coeff = np.polyfit(t[i - 1 : i + 2], v[i - 1 : i + 2], 2)
    if coeff[0] >= 0.0:
        return PeakResult(t_peak=float(t[i]), value=float(v[i]), interior=True)
    t_star = float(-coeff[1] / (2.0 * coeff[0]))
    t_star = min(max(t_star, float(t[i - 1])), float(t[i + 1]))
    v_star = float(np.polyval(coeff, t_star))
    return PeakResult(t_peak=t_star, value=v_star, interior=True)
