"""Exact layouts from the perimeter-minimization model."""

from .bnb import SolveConfig, solve
from .model import (Constraint, Model, ModelParams, ModelValidationError, Relation, Solution, Violation,
                    build_model, check_feasibility, evaluate_objective, export_model, lower_bound,
                    solution_from_layout)
from .subproblem import InfeasibilityCertificate, solve_subproblem

__all__ = [
    "Constraint", "InfeasibilityCertificate", "Model", "ModelParams", "ModelValidationError", "Relation",
    "Solution", "SolveConfig", "Violation", "build_model", "check_feasibility", "evaluate_objective",
    "export_model", "lower_bound", "solution_from_layout", "solve", "solve_subproblem",
]
