"""Quarter-car suspension with fuzzy PID control tuned by BBO, PSO and GA."""

from .controller import ControllerGenome, ControllerState, compute_force
from .errors import ConfigError, NoRuleFired, NumericDivergence
from .fuzzy import IT2Partition, RuleBase, T1Partition, it2_infer, km_type_reduce, mf_grade, t1_infer
from .harness import SimConfig, SimResult, compare, mse, objective, run_closed_loop
from .optim import OptimizerConfig, OptResult, SearchSpace, bbo_optimize, ga_optimize, optimize, pso_optimize
from .plant import PlantState, RoadProfile, SuspensionParams, derivatives, rk4_step, road_eval

__version__ = "0.1.0"

__all__ = [
    "ControllerGenome", "ControllerState", "compute_force",
    "ConfigError", "NoRuleFired", "NumericDivergence",
    "IT2Partition", "RuleBase", "T1Partition", "it2_infer", "km_type_reduce", "mf_grade", "t1_infer",
    "SimConfig", "SimResult", "compare", "mse", "objective", "run_closed_loop",
    "OptimizerConfig", "OptResult", "SearchSpace", "bbo_optimize", "ga_optimize", "optimize", "pso_optimize",
    "PlantState", "RoadProfile", "SuspensionParams", "derivatives", "rk4_step", "road_eval",
]
