"""Semi-smooth Newton and coordinate-descent solvers for MCP/SCAD regression."""
from .cd import CdOptions, cd_solve, cd_sweep
from .kkt import (
    ActivePartition,
    PrimalDualState,
    Problem,
    dual_from_beta,
    kkt_max_violation,
    kkt_residual,
    partition_mcp,
    partition_scad,
)
from .path import (
    EmptySignal,
    NoNonzeroSolution,
    PathOptions,
    PathResult,
    fit_lambda,
    lambda_grid,
    select_hbic,
    select_vsc,
    solve_path,
)
from .penalty import (
    Family,
    PenaltySpec,
    newton_derivative,
    penalty_derivative,
    penalty_value,
    soft_threshold,
    threshold,
    threshold_vector,
)
from .simgen import SimConfig, evaluate_metrics, generate, generate_design, generate_response, generate_signal
from .ssn import (
    OversizedActiveSet,
    SingularReducedSystem,
    SsnOptions,
    SsnSolution,
    Stop,
    solve_reduced_system,
    ssn_solve,
    ssn_step_mcp,
    ssn_step_scad,
)

__version__ = "0.1.0"
