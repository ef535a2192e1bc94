"""Simulation and bounds for collaborative labeling with inconsistent teacher names."""

from .algorithms import ReprConfig, RunOutcome, run_c3, run_c4, run_representatives, verify_partition
from .bounds import (
    c3_bound,
    c4_bound,
    expected_unique_exact,
    optimize_beta,
    q_function,
    representatives_bound,
    representatives_bound_exact,
    upper_bound,
)
from .errors import BudgetError, ConfigError, ConsistencyViolation, DomainError, IntegrityError
from .graph import ContractionGraph, new_graph
from .harness import ExperimentConfig, ExperimentResult, baseline_split, run_experiment, sweep
from .problem import Distribution, GroundTruth, ProblemConfig, generate_problem, representatives_of
from .teachers import NamingModel, ReplayPool, TeacherPool, parse_replay_log

__version__ = "0.1.0"
