"""Maximum weight tree matching: exact solvers, LP rounding heuristic, SAT reductions, benchmarks."""

from .boa import BOAResult, InvariantViolation, bottom_up_assignment
from .core import (Assignment, InfeasibleInstanceError, Instance, InvalidInstanceError,
                   InvalidTreeError, MWTMError, RootWeightError, TreeTopology, assignment_weight,
                   build_tree, check_feasibility, delete_nodes, leaves, path_to_root,
                   paths_independent, validate_assignment)
from .exact import ExactResult, solve_brute_force, solve_ilp
from .lp import LPModel, LPSolution, build_lp_relaxation, solve_lp

__version__ = "0.1.0"
