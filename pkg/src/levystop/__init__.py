"""Optimal stopping of staged projects driven by spectrally negative Levy
processes with phase-type downward jumps.

The workflow: build a model (`build_model`), bind it to a discount rate
(`make_context`), describe stages as (running payoff, terminal reward) pairs
(`reward` / `simple` / `linear_floor` / `exp_cap` / `weighted_sum` feeding
`StageSpec`), then solve (`solve_threshold` for one stage, `solve_partition`
for many) and evaluate (`value_at`, `multi_value`, `perturbed_value`).
Monte Carlo and generator-residual checks live in `levystop.verify`.
"""

from .errors import (
    ConvergenceFailure,
    DegenerateExponent,
    DomainError,
    ImaginaryResidual,
    InfeasibleThresholds,
    InvalidInitialDistribution,
    InvalidSubgenerator,
    LevyStopError,
    QuadratureFailure,
    RangeError,
    RootMultiplicity,
    SingularResolvent,
    UnsupportedModel,
)
from .levy_model import (
    LevyModel,
    PhaseTypeJump,
    SpectralData,
    build_jump,
    build_model,
    char_poly,
    laplace_exponent,
    psi_derivative,
    psi_prime_zero,
    solve_phi,
    spectral_data,
)
from .scale_fn import (
    FirstPassage,
    ScaleContext,
    W,
    W_prime,
    W_second,
    W_tilted,
    Z,
    Z_tilted,
    Zbar,
    discounted_position_at_passage,
    first_passage_functionals,
    make_context,
)
from .payoffs import (
    ExpCap,
    LinearFloor,
    RewardSpec,
    RunningPayoff,
    Simple,
    WeightedSum,
    exp_cap,
    f_eval,
    g_eval,
    linear_floor,
    reward,
    simple,
    varpi,
    weighted_sum,
)
from .one_stage import (
    StageSpec,
    ThresholdSolution,
    lambda_fn,
    never_stop_value,
    solve_threshold,
    value_at,
    value_optimal,
)
from .multi_stage import (
    MultiStageSpec,
    StagePartition,
    lambda_cluster,
    merge_stages,
    multi_stage,
    multi_value,
    perturbed_value,
    solve_cluster_threshold,
    solve_partition,
    update_partition,
)
from .verify import (
    McEstimate,
    SimConfig,
    generator_residual,
    sample_jump,
    sim_config,
    simulate_strategy,
    simulate_two_sided,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceFailure",
    "DegenerateExponent",
    "DomainError",
    "ImaginaryResidual",
    "InfeasibleThresholds",
    "InvalidInitialDistribution",
    "InvalidSubgenerator",
    "LevyStopError",
    "QuadratureFailure",
    "RangeError",
    "RootMultiplicity",
    "SingularResolvent",
    "UnsupportedModel",
    "LevyModel",
    "PhaseTypeJump",
    "SpectralData",
    "build_jump",
    "build_model",
    "char_poly",
    "laplace_exponent",
    "psi_prime_zero",
    "solve_phi",
    "psi_derivative",
    "spectral_data",
    "FirstPassage",
    "ScaleContext",
    "W",
    "W_prime",
    "W_second",
    "W_tilted",
    "Z",
    "Z_tilted",
    "Zbar",
    "discounted_position_at_passage",
    "first_passage_functionals",
    "make_context",
    "ExpCap",
    "LinearFloor",
    "RewardSpec",
    "RunningPayoff",
    "Simple",
    "WeightedSum",
    "exp_cap",
    "f_eval",
    "g_eval",
    "linear_floor",
    "reward",
    "simple",
    "varpi",
    "weighted_sum",
    "StageSpec",
    "ThresholdSolution",
    "lambda_fn",
    "never_stop_value",
    "solve_threshold",
    "value_at",
    "value_optimal",
    "MultiStageSpec",
    "StagePartition",
    "lambda_cluster",
    "merge_stages",
    "multi_stage",
    "multi_value",
    "perturbed_value",
    "solve_cluster_threshold",
    "solve_partition",
    "update_partition",
    "McEstimate",
    "SimConfig",
    "generator_residual",
    "sample_jump",
    "sim_config",
    "simulate_strategy",
    "simulate_two_sided",
    "__version__",
]
