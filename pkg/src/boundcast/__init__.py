"""Non-parametric time-series forecasting by error-bound minimization."""

from .core import (
    DesignSet,
    Embedding,
    HyperParams,
    RegressorSpec,
    TimeSeries,
    apply_regressor,
    build_design,
    build_embeddings,
    weight_diagonal,
)
from .solvers import SolveResult, solve_combined, solve_l1_equality, solve_weighted_ls

__version__ = "0.1.0"

__all__ = [
    "DesignSet",
    "Embedding",
    "HyperParams",
    "RegressorSpec",
    "SolveResult",
    "TimeSeries",
    "apply_regressor",
    "build_design",
    "build_embeddings",
    "solve_combined",
    "solve_l1_equality",
    "solve_weighted_ls",
    "weight_diagonal",
    "__version__",
]
