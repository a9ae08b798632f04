"""Exact analysis and MCMC sampling for Markov chains on finite state spaces."""
from .chain import (
    ATOL,
    Distribution,
    StateSpace,
    TransitionKernel,
    UnnormalizedWeights,
    detailed_balance_residual,
    is_invariant,
    kernel_compose,
    kernel_power,
    push_forward,
)
from .convergence import (
    ConvergenceCurve,
    CouplingCertificate,
    convergence_curve,
    coupling_bound,
    mixing_time,
    tv_distance,
)
from .errors import (
    CoordinateOutOfRange,
    EmptyAfterBurnIn,
    InvalidInput,
    MarkovError,
    NotAnEigenvector,
    NotAperiodic,
    NotIrreducible,
    SingularSystem,
    SiteOutOfRange,
    SpaceMismatch,
)
from .models import (
    IsingModel,
    enumerate_expectation,
    ising_site_conditional,
    ising_weights,
    reducible_gibbs_target,
    run_ising_gibbs,
)
from .samplers import (
    ChainTrace,
    ProductSpaceCodec,
    ProposalKernel,
    RandomStream,
    ergodic_average,
    gibbs_conditional_kernel,
    gibbs_step,
    gibbs_sweep_kernel,
    mh_kernel,
    mh_step,
    run_chain,
    run_gibbs,
    run_mh,
    step,
)
from .stationary import StationaryResult, left_eigenvector_sign_check, solve_stationary
from .structure import (
    StructureReport,
    analyze,
    check_aperiodic,
    check_irreducible,
    compute_period,
    positivity_certificate,
)

__version__ = "0.1.0"
