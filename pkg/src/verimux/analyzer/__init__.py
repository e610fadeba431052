from .affine import (AffineBounds, influence_scores, linear_form_bounds, propagate_affine,
                     relu_relaxation)
from .interval import interval_bounds, propagate_box
from .refine import AFFINE, BOX, AnalyzerConfig, verify_goal
from .search import goal_mask, search_counterexample

__all__ = [
    "AFFINE", "AffineBounds", "AnalyzerConfig", "BOX", "goal_mask", "influence_scores",
    "interval_bounds", "linear_form_bounds", "propagate_affine", "propagate_box",
    "relu_relaxation", "search_counterexample", "verify_goal",
]
