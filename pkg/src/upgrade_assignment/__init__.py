"""Exact solver for the multiplicative assignment problem with supplier upgrades."""

from .core import (
    Customer,
    Instance,
    InstanceError,
    Solution,
    Supplier,
    cost,
    evaluate,
    format_rational,
    instance_from_json,
    instance_to_json,
    normalize,
    optimal_assignment,
    parse_rational,
)
from .matching import lagrangian_matching, min_cost_perfect_matching
from .oracle import CapExceeded, HProfile, brute_force, check_supermodular, greedy, h_profile
from .scheduling import Schedule, SchedulingInstance, brute_force_schedule, solve_schedule
from .solver import InvariantViolation, Pair, SolveTrace, solve
from .variants import Fixture, builtin_fixtures, load_fixture_dir, verify_fixture

__all__ = [
    "CapExceeded",
    "Customer",
    "Fixture",
    "HProfile",
    "Instance",
    "InstanceError",
    "InvariantViolation",
    "Pair",
    "Schedule",
    "SchedulingInstance",
    "Solution",
    "SolveTrace",
    "Supplier",
    "brute_force",
    "brute_force_schedule",
    "builtin_fixtures",
    "check_supermodular",
    "cost",
    "evaluate",
    "format_rational",
    "greedy",
    "h_profile",
    "instance_from_json",
    "instance_to_json",
    "lagrangian_matching",
    "load_fixture_dir",
    "min_cost_perfect_matching",
    "normalize",
    "optimal_assignment",
    "parse_rational",
    "solve",
    "solve_schedule",
    "verify_fixture",
]
