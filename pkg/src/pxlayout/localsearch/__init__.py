from .elimination import (EliminationMap, EliminationStats, EliminationUnsat,
                          Substitution, unit_equation_elimination)
from .kernel import kernel_mode
from .solver import LocalSearchSolver, warm_start_from

__all__ = [
    "EliminationMap", "EliminationStats", "EliminationUnsat", "Substitution",
    "unit_equation_elimination", "kernel_mode",
    "LocalSearchSolver", "warm_start_from",
]
