"""Multi-mode quantum entropy power inequality toolkit.

Gaussian bosonic states at covariance level, linear mixing channels, the qEPI
rate and its proof-technique flow, plus a truncated Fock-space oracle for
non-Gaussian spot checks.
"""

__version__ = "0.1.0"

from .errors import (
    DomainError,
    InadmissibleCovariance,
    InadmissibleProbe,
    InsufficientRange,
    NotPositiveDefinite,
    PureModeError,
    QepiLabError,
    ShapeMismatch,
    SingularBlock,
    SolverOverflow,
    SupportViolation,
    TruncationError,
)
from .symplectic_core import (
    CovarianceMatrix,
    SymplecticForm,
    SymplecticSpectrum,
    is_admissible,
    random_covariance,
    random_symplectic,
    symplectic_eigenvalues,
    symplectic_form,
    williamson,
)
from .gaussian_state import (
    FisherMatrix,
    GaussianState,
    entropy,
    entropy_h,
    fisher,
    gaussianize,
    relative_entropy_displaced,
)
from .mixing import (
    MixingMatrix,
    ProductGaussianInput,
    amplifier,
    apply,
    beam_splitter,
    output_covariance,
    random_mixing,
    saturating_family,
)
from .qepi_check import (
    QepiReport,
    classical_gaussian_epi_check,
    hessian_data_processing_check,
    qepi_rate,
    stam_check,
)
from .flow import (
    AsymptoticBounds,
    FlowState,
    FlowTrace,
    ScalingFit,
    asymptotic_bounds,
    diffuse,
    entropy_derivative_check,
    entropy_power,
    integrate_flow,
    scaling_fit,
)
from .fock_oracle import (
    FockState,
    TwoModeUnitary,
    channel_apply,
    qepi_spot_check,
    von_neumann_entropy,
)
