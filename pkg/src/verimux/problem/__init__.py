"""Verification-problem IR: boxes, normalized goals, and goal transformations."""

from .box import Box
from .goal import (
    Atom, ClassIs, ClassIsNot, LinearConstraint, NormalizedGoal, class_atoms, normalize_goal,
)
from .ir import (
    FALSIFICATION, PROOF, VerificationProblem, build_goal_problems, build_problems, negate_goal,
    normalize, split_goals,
)

__all__ = [
    "Box", "Atom", "ClassIs", "ClassIsNot", "LinearConstraint", "NormalizedGoal", "class_atoms",
    "normalize_goal", "FALSIFICATION", "PROOF", "VerificationProblem", "build_goal_problems",
    "build_problems", "negate_goal", "normalize", "split_goals",
]
