"""Radially symmetric stochastic control with unit quadratic variation.

Builds the explicit value function from switching radii, classifies the
origin for singular costs, simulates controlled paths and checks the HJB
equation numerically.
"""
from .cost import Growth, Kind, Monotone, RadialCost
from .errors import (CostSpecError, DivergentIntegral, EvalAtSingularOrigin, InconsistentDeclaration,
                     NotMonotoneAtOrigin, OriginValueInfinite, PolicyError, PolicyUndefinedAtOrigin)
from .hjb import residuals, verify
from .montecarlo import CostEstimate, compare_policies, estimate_cost, radial_oracle
from .origin import OriginClassification, Regime, classify_origin
from .sim import ControlPolicy, PathResult, SimConfig, simulate_path, simulate_paths, step_z
from .switching import SwitchingSchedule, build_schedule, next_r, next_s
from .value import PiecewiseValue, build_value, check_fit, eval_derivative, eval_value, tabulate

__all__ = [
    "ControlPolicy", "CostEstimate", "CostSpecError", "DivergentIntegral", "EvalAtSingularOrigin",
    "Growth", "InconsistentDeclaration", "Kind", "Monotone", "NotMonotoneAtOrigin", "OriginClassification",
    "OriginValueInfinite", "PathResult", "PiecewiseValue", "PolicyError", "PolicyUndefinedAtOrigin",
    "RadialCost", "Regime", "SimConfig", "SwitchingSchedule", "build_schedule", "build_value",
    "check_fit", "classify_origin", "compare_policies", "estimate_cost", "eval_derivative", "eval_value",
    "next_r", "next_s", "radial_oracle", "residuals", "simulate_path", "simulate_paths", "step_z",
    "tabulate", "verify",
]
