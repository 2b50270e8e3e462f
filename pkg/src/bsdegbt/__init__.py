"""Theta-scheme BSDE solvers with boosted regression trees."""
__version__ = "0.1.0"

from .gbt import GbtHyperParams, GbtModel, best_split, fit, learning_curve, predict
from .metrics import RunStats, convergence_probe, run_experiment, scaling_probe
from .paths import (EulerGeneric, GeometricBrownian, ScaledBrownian, TimeGrid, build_grid,
                    sample_paths)
from .presets import ExamplePreset, preset
from .problems import BsdeProblem, ExampleSpec, analytic_solution, example, make_example
from .schemes import (ConfigurationError, NumericalFailure, Scheme, SolutionEstimate,
                      SolverConfig, mc_shortcut, solve, solve_with_oracle)

__all__ = [
    "BsdeProblem", "ConfigurationError", "EulerGeneric", "ExamplePreset", "ExampleSpec", "GbtHyperParams",
    "GbtModel", "GeometricBrownian", "NumericalFailure", "RunStats", "ScaledBrownian", "Scheme",
    "SolutionEstimate", "SolverConfig", "TimeGrid", "analytic_solution", "best_split",
    "build_grid", "convergence_probe", "example", "fit", "learning_curve", "make_example",
    "mc_shortcut", "predict", "preset", "run_experiment", "sample_paths", "scaling_probe", "solve",
    "solve_with_oracle",
]
