"""qpower: simulation, verification and query-cost benchmarking of
noisy-power-method eigensolvers and their quantum-subroutine emulations."""

from ._validation import as_rng
from .dgauss import (
    DiscreteGaussianSpec,
    SubGaussianCertificate,
    check_subgaussian,
    gaussian_state_closeness,
    rho,
    variant_tv_distance,
)
from .estimators import NoisyPowerMethod, QuantumNoisyPowerMethod, TopEigenspace
from .kptree import KPTree
from .ledger import QueryLedger
from .phase import (
    GPEResult,
    PhaseRegister,
    amp_estimate,
    gpe_outcome_distribution,
    gpe_run,
    inverse_qft,
    qft,
    subgpe,
)
from .solvers import (
    IPEConfig,
    NPMConfig,
    SubspaceConfig,
    estimate_lambda_q,
    ipe,
    npm_classical,
    prepare_v1_emulated,
    qnpm,
    subspace_tomography,
    top_q_pipeline,
)
from .spectral import (
    HardInstance,
    HermitianMatrix,
    SpectralDecomposition,
    eigendecompose,
    gen_gaussian_rect,
    gen_hard_instance,
    gen_symmetric_gaussian,
    jacobi_eigh,
    project_above,
    random_unit_vector,
)
from .tomography import (
    ReferenceState,
    TomographyEstimate,
    basis_tomography,
    coupled_ideal_check,
    refined_tomography,
    unbiased_estimate,
)

__version__ = "0.1.0"
