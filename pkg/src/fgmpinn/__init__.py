"""Physics-informed neural networks trained on discretised thermo-elastic energy functionals."""
from .fields import FieldModel
from .metrics import Score, r2, score_problem
from .network import ConfigError, MlpConfig
from .problems import CODES, VARIABLES, ProblemSpec, get_problem
from .solution import SolutionReport, evaluate_solution, predict
from .trainer import NumericalAbort, TrainConfig, train

__version__ = "0.1.0"

__all__ = [
    "CODES",
    "VARIABLES",
    "ConfigError",
    "FieldModel",
    "MlpConfig",
    "NumericalAbort",
    "ProblemSpec",
    "Score",
    "SolutionReport",
    "TrainConfig",
    "evaluate_solution",
    "get_problem",
    "predict",
    "r2",
    "score_problem",
    "train",
]
