"""Fictitious play variants with adaptive forgetting, and their benchmarks."""

from .beliefs import AfffpBelief, ClassicFpBelief, GeometricFpBelief, afffp_step, strategy
from .decision import DecisionRule, best_response, logit, smooth_best_response
from .engine import NegotiationTrace, RunConfig, run_episode, run_replications
from .errors import InputError, InstanceTooLargeError, NumericalDegeneracyError, RunFailure
from .game import MatrixGame, StrategicFormGame, WluGame, expected_utility, evaluate_utility
from .solver import AllocationSolution, solve_bruteforce, solve_exact
from .tracking import EstimatorConfig, ScriptedOpponent, SweepGrid, run_sweep, run_tracking

__version__ = "0.1.0"
