"""Relative-entropy non-Gaussianity of perturbed single-mode Gaussian states."""

from .errors import (
    BadSpec,
    DivisionGuard,
    DomainError,
    HermiticityViolation,
    InfeasibleConstraint,
    NegativityViolation,
    NumericalGuardError,
    SupportViolation,
    TraceViolation,
    TruncationLeak,
    UncertaintyViolation,
)
from .fock import (
    DensityMatrix,
    NumberDistribution,
    make_density,
    mean_photon_number,
    mode_operators,
    number_distribution,
    purity,
    von_neumann_entropy,
)
from .gaussian import (
    CovarianceData,
    GaussianParams,
    covariance_of,
    gaussian_state,
    h_function,
    thermal_probs,
    reference_gaussian,
    symplectic_unitary,
    thermal_state,
    williamson_1mode,
)
from .metric import (
    TangentDirection,
    bures_distance_sq,
    classical_fisher_half,
    fidelity,
    qfi_distance,
    qfi_finite_difference,
)
from .nongauss import non_gaussianity, relative_entropy
from .perturb import (
    PerturbationFamily,
    TargetSpec,
    coherence_perturbation,
    concavity_bound,
    convex_combination,
    ng_exact_diagonal,
    ng_second_order,
    ng_second_order_target,
    target_distribution,
)
from .verify import (
    SweepTable,
    VerificationReport,
    random_target_baseline,
    search_max_ng,
    sweep_fig1,
    verify_second_order,
    verify_theorem1,
    verify_theorem2,
)

__version__ = "0.1.0"
