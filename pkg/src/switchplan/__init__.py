"""switchplan: optimal path planning under randomly switching dynamics.

Value functions of weakly-coupled static HJB systems on Cartesian grids by
monotone Gauss-Seidel sweeping, feedback-policy extraction, evaluation of
policies planned with mismatched switching rates, and Monte-Carlo simulation
of the controlled random-switching process.
"""

from .errors import (ConfigurationError, ConvergenceError, IrreducibilityError,
                     NoPolicyError, RateMatrixError, UnreachableModeError)
from .markov import (expected_hitting_time, invariant_distribution,
                     is_irreducible, mode_difference_bound, sample_mode_path,
                     transition_probabilities, validate_rates)
from .model import (BLOCKED, FREE, TARGET, UNREACHED, Dynamics, Grid, Problem,
                    Rect, Region, classify_gridpoints, neighbors)
from .planners import (COUPLED, INFINITE_RATE, UNCOUPLED, Policy,
                       averaged_problem, expand_field, extract_policy,
                       make_policy, solve_coupled, solve_infinite_rate,
                       solve_uncoupled)
from .ring import (RingSpec, adjacent_rate, build_ring_problem, mode_angles,
                   ring_rate_matrix, theta_variability_bound)
from .scenarios import eikonal_problem, open_water_problem, two_wind_problem
from .simulate import (SimStats, TrajectoryRecord, monte_carlo, policy_at,
                       run_trajectory)
from .sweep import (SolveReport, ValueField, evaluate_frozen_policy,
                    sweep_solve)
from .updates import (ORTHANTS_2D, UpdateResult, euler_update,
                      one_sided_update, orthants, quadratic_two_sided,
                      semilag_update, simplex_value)

__version__ = "0.1.0"

__all__ = [
    "BLOCKED", "COUPLED", "ConfigurationError", "ConvergenceError", "Dynamics",
    "FREE", "Grid", "INFINITE_RATE", "IrreducibilityError", "NoPolicyError",
    "ORTHANTS_2D", "Policy", "Problem", "RateMatrixError", "Rect", "Region",
    "RingSpec", "SimStats", "SolveReport", "TARGET", "TrajectoryRecord",
    "UNCOUPLED", "UNREACHED", "UnreachableModeError", "UpdateResult",
    "ValueField", "adjacent_rate", "averaged_problem", "build_ring_problem",
    "classify_gridpoints", "eikonal_problem", "euler_update",
    "evaluate_frozen_policy", "expand_field", "expected_hitting_time",
    "extract_policy", "invariant_distribution", "is_irreducible",
    "make_policy", "mode_angles", "mode_difference_bound", "monte_carlo",
    "neighbors", "one_sided_update", "open_water_problem", "orthants",
    "policy_at", "quadratic_two_sided", "ring_rate_matrix", "run_trajectory",
    "sample_mode_path", "semilag_update", "simplex_value",
    "solve_coupled", "solve_infinite_rate", "solve_uncoupled", "sweep_solve",
    "theta_variability_bound", "transition_probabilities", "two_wind_problem",
    "validate_rates",
]
