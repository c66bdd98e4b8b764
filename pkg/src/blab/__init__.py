"""Numerical weighted Bergman kernels on C and on Hartogs domains over C."""

from .bergman import (
    KernelModel,
    build_kernel,
    extremal_diag,
    kernel_convergence,
    kernel_diag,
    kernel_diag_by_degree,
    kernel_eval,
    offdiag_convergence,
    reproduce_check,
)
from .errors import (
    BlabError,
    CenterOutOfDomain,
    ConfigError,
    GramNotPositiveDefinite,
    InsufficientResolution,
    MassTooLarge,
    NoCoerciveTerm,
    NonFiniteIntegrand,
    NonIntegrableWeight,
    NonRadialWeight,
    NotMonotone,
    PointOutsideDomain,
    RadiusOrderViolated,
)
from .grid import PolarGrid, build_polar_grid, integrate
from .hartogs import (
    HartogsDomain,
    build_ligocka_series,
    hartogs_convergence,
    hartogs_direct_kernel,
    ligocka_partial,
    ligocka_tail,
)
from .quad import (
    convexity_bound_check,
    discretization_gap,
    discretize_measure,
    exp_neg_potential_integral,
    reciprocal_power_integral,
    section2_bound,
    tail_bound,
)
from .weights import (
    CircleMeasure,
    Const,
    GridDensity,
    InverseSquareDensity,
    LogAtom,
    LogOnePlusSq,
    LogPotential,
    PlanarMeasure,
    RadialPoly,
    RadialPowerDensity,
    WeightExpr,
    WeightSequence,
    check_integrable,
    circle_measure,
    companion_weight,
    condition_b_probe,
    eval_weight,
    fock,
    log_potential,
    lower_bound_constant,
    riesz_measure,
    riesz_split,
    uniform_disc_measure,
    upper_bound_constant,
)

__version__ = "0.1.0"
