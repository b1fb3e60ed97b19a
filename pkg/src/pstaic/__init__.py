"""Joint restoration and regularisation-weight estimation for 2D+time images.

The main entry points are `pstaic_restore` (estimated spatial/temporal
weight), `pictv_restore` (the weighted ICTV baseline) and the synthetic
data tools in `pstaic.simkit`.
"""
from .admm import AdmmConfig, solve_image_subproblem
from .drivers import RestoreConfig, RestoreReport, evaluate_cost, pictv_restore, pstaic_restore, restore, staic_restore
from .prox import BoxSet
from .weights import ConstantTau, MotionAdaptiveTau, solve_weight

__version__ = "0.1.0"

__all__ = [
    "AdmmConfig",
    "BoxSet",
    "ConstantTau",
    "MotionAdaptiveTau",
    "RestoreConfig",
    "RestoreReport",
    "evaluate_cost",
    "pictv_restore",
    "pstaic_restore",
    "restore",
    "solve_image_subproblem",
    "solve_weight",
    "staic_restore",
]
