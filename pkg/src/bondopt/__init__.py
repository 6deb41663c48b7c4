"""Surrogate-assisted multi-objective optimization of a noisy bonding process."""

from .acquisition import PsoConfig, expected_improvement, infill_criterion, mei, pso_maximize
from .config import RunConfig, echo_config, load_config
from .driver import (
    ComparisonReport,
    RunResult,
    batch_compare,
    emit_comparison,
    emit_results,
    run_experiment,
    run_mosk,
    run_nsga2,
    run_single,
)
from .errors import BondoptError, ConfigError, DomainError, FitError
from .kriging import KrigingModel, log_marginal_likelihood, predict
from .logistic import LogisticModel, fit_logistic, predict_probability
from .nsga2 import Nsga2Config, nsga2_run
from .pareto import (
    ParetoArchive,
    Weights,
    canonical,
    dominates,
    hypervolume_2d,
    pareto_filter,
    sample_weights,
    tchebycheff,
    update_archive,
)
from .sampling import latin_hypercube
from .simulator import (
    BondingSimulator,
    FailureMode,
    Observation,
    ReplicatedObservation,
    SimulatorConfig,
    bonding_space,
    is_feasible,
)
from .space import DesignPoint, DesignSpace, Dimension, decode, design_point, encode

__all__ = [
    "BondingSimulator",
    "BondoptError",
    "ComparisonReport",
    "ConfigError",
    "DesignPoint",
    "DesignSpace",
    "Dimension",
    "DomainError",
    "FailureMode",
    "FitError",
    "KrigingModel",
    "LogisticModel",
    "Nsga2Config",
    "Observation",
    "ParetoArchive",
    "PsoConfig",
    "ReplicatedObservation",
    "RunConfig",
    "RunResult",
    "SimulatorConfig",
    "Weights",
    "batch_compare",
    "bonding_space",
    "canonical",
    "decode",
    "design_point",
    "dominates",
    "echo_config",
    "emit_comparison",
    "emit_results",
    "encode",
    "expected_improvement",
    "fit_logistic",
    "hypervolume_2d",
    "infill_criterion",
    "is_feasible",
    "latin_hypercube",
    "load_config",
    "log_marginal_likelihood",
    "mei",
    "nsga2_run",
    "pareto_filter",
    "predict",
    "predict_probability",
    "pso_maximize",
    "run_experiment",
    "run_mosk",
    "run_nsga2",
    "run_single",
    "sample_weights",
    "tchebycheff",
    "update_archive",
]
