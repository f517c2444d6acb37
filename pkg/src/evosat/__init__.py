"""MAX-SAT local search with evolved initial-assignment preambles."""

__version__ = "0.1.0"

from evosat.cnf import (
    DimacsError,
    EvalState,
    Instance,
    brute_force_optimum,
    load_instance,
    parse_dimacs,
    random_assignment,
    satisfied_count_naive,
)
from evosat.ga import Fitness, GaParams, GaRecord, Individual, run_ga
from evosat.harness import (
    BaselineRecord,
    ComparisonRow,
    ConfigError,
    ExperimentConfig,
    emit_report,
    run_baseline,
    run_experiment,
    success_ratio,
)
from evosat.heuristics import KINDS, HeuristicSpec, RunRecord, run_heuristic
from evosat.preamble import (
    Action,
    Preamble,
    Step,
    format_preamble,
    parse_preamble,
    playout,
    random_preamble,
)

__all__ = [
    "Action",
    "BaselineRecord",
    "ComparisonRow",
    "ConfigError",
    "DimacsError",
    "EvalState",
    "ExperimentConfig",
    "Fitness",
    "GaParams",
    "GaRecord",
    "HeuristicSpec",
    "Individual",
    "Instance",
    "KINDS",
    "Preamble",
    "RunRecord",
    "Step",
    "brute_force_optimum",
    "emit_report",
    "format_preamble",
    "load_instance",
    "parse_dimacs",
    "parse_preamble",
    "playout",
    "random_assignment",
    "random_preamble",
    "run_baseline",
    "run_experiment",
    "run_ga",
    "run_heuristic",
    "satisfied_count_naive",
    "success_ratio",
    "__version__",
]
