"""Conditional gradient solvers over measures for sparse inverse problems."""

from .fcstep import WeightProblem, project_capped_simplex, solve_weights
from .loss import Loss, SquaredLoss
from .measure import (
    AtomicMeasure,
    Observation,
    apply_forward,
    caratheodory_prune,
    prune_zero_weights,
    residual,
)
from .solver import (
    ADCG,
    CGM_M,
    GF,
    ForwardModel,
    SolveResult,
    SolverConfig,
    estimate_curvature,
    frank_wolfe_gap,
    local_descent,
    run,
)

__version__ = "0.1.0"

__all__ = [
    "AtomicMeasure",
    "Observation",
    "apply_forward",
    "residual",
    "prune_zero_weights",
    "caratheodory_prune",
    "Loss",
    "SquaredLoss",
    "WeightProblem",
    "project_capped_simplex",
    "solve_weights",
    "ForwardModel",
    "SolverConfig",
    "SolveResult",
    "frank_wolfe_gap",
    "local_descent",
    "estimate_curvature",
    "run",
    "CGM_M",
    "ADCG",
    "GF",
    "__version__",
]
