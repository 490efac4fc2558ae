"""Placement MILP: exact branch-and-bound, greedy baseline, enumeration oracle, LP export."""

from ..domain import Placement
from .exact import DEFAULT_NODE_BUDGET, DEFAULT_TIME_BUDGET, solve_exact
from .greedy import solve_greedy
from .kernel import KERNEL
from .lp import export_lp
from .model import (
    BudgetExhaustedError,
    HeuristicInfeasibleError,
    InfeasibleInstanceError,
    MilpInstance,
    SolveResult,
    check_feasible,
    objective_value,
)
from .oracle import OracleRefusedError, brute_force_oracle, enumerate_optimal

__all__ = [
    "DEFAULT_NODE_BUDGET",
    "DEFAULT_TIME_BUDGET",
    "KERNEL",
    "BudgetExhaustedError",
    "HeuristicInfeasibleError",
    "InfeasibleInstanceError",
    "MilpInstance",
    "OracleRefusedError",
    "Placement",
    "SolveResult",
    "brute_force_oracle",
    "check_feasible",
    "enumerate_optimal",
    "export_lp",
    "objective_value",
    "solve_exact",
    "solve_greedy",
]
