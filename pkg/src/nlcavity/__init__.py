"""nlcavity: driven nonlinear optical cavities and their qubit limits.

Dense master-equation simulation of Kerr, chi2 and two-photon-absorbing
cavities, the adiabatic-elimination setups that connect them to the
driven two-level limit, and phase-space / non-Gaussianity analysis of
the intracavity field.
"""

from ._backend import backend_name
from .analysis import (
    MomentSet,
    PeakResult,
    WignerGrid,
    delta_b,
    gaussian_reference_entropy,
    moments,
    peak_find,
    reduce_to_mode,
    von_neumann_entropy,
    wigner,
    wigner_min,
)
from .config import ScenarioConfig, parse_config
from .errors import (
    ConfigError,
    DimensionMismatch,
    InvariantViolation,
    NumericalError,
)
from .limits import (
    ComparisonResult,
    ConvergenceReport,
    ScalingSetup,
    StructuralReport,
    chi2_setup,
    compare_prelimit_limit,
    convergence_sweep,
    kerr_setup,
    oscillation_count,
    tpa_setup,
    verify_structural,
)
from .fock import (
    Operator,
    SpaceSignature,
    StateVector,
    annihilation,
    coherent_state,
    commutator,
    creation,
    dagger,
    displacement_operator,
    fock_state,
    identity,
    number,
    parity_operator,
    projector,
    tensor,
    zero,
)
from .master import (
    DensityMatrix,
    IntegratorConfig,
    Trajectory,
    expectation,
    integrate,
    leakage,
    liouvillian_apply,
    liouvillian_matrix,
    populations,
    qubit_projector,
    steady_state,
    truncation_check,
)
from .runner import build_model, run, run_steady
from .slh import (
    DriveSpec,
    SLHModel,
    apply_coherent_drive,
    build_chi2,
    build_chi2_dispersive,
    build_kerr,
    build_linear_cavity,
    build_qubit_limit,
    build_tpa,
    qubit_limit_series_form,
    series_product,
    weyl_model,
)
from .version import VERSION as __version__
