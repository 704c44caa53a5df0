"""reflab: penalized obstacle dynamics for stochastic diffusion-convection.

Semi-implicit trajectories of the penalized equation, structural audits of
the nonlinear flux, Q-Wiener increments, energy ledgers, reflection-measure
diagnostics across penalty sweeps, and parabolic capacity estimates on
coarse space-time obstacle sets.
"""
__version__ = "1.0.0"

from .grids import (Grid, build_grid, gradient, divergence, norm,
                    pos_neg_parts, truncate)
from .models import (FluxModel, ReactionModel, SmoothPosApprox,
                     audit_assumptions, eval_flux, eval_reaction,
                     make_reaction, obstacle_shift, smooth_pos)
from .noise import (NoisePath, NoiseSpec, build_noise, coarsen_path,
                    draw_path, hs_norm_sq, increments_all, sample_increment,
                    validate_regularity)
from .solver import (EnergyLedger, NonConvergence, NonFinite, SolverConfig,
                     TrajectoryRecord, dissipation_coercivity,
                     energy_residual, monte_carlo, solve_coupled,
                     solve_trajectory, step)
from .reflection import (MeasureGrid, boundary_weight, complementarity,
                         eta_density, pair_with, smooth_test_battery,
                         sweep_report, weighted_mass)
from .capacity import (CapacityEstimate, CapacityProblem, capacity_norm,
                       estimate_capacity, lebesgue_lower_bound_check,
                       lebesgue_measure, make_problem, reflect_even,
                       reflected_capacity, reflected_problem)
from .config import (ConfigError, ExperimentConfig, build_objects,
                     capacity_cells, fingerprint, initial_state,
                     parse_config, read_config, standard_config, to_text)

__all__ = [
    "__version__",
    "Grid", "build_grid", "gradient", "divergence", "norm",
    "pos_neg_parts", "truncate",
    "FluxModel", "ReactionModel", "SmoothPosApprox", "audit_assumptions",
    "eval_flux", "eval_reaction", "make_reaction", "obstacle_shift",
    "smooth_pos",
    "NoisePath", "NoiseSpec", "build_noise", "coarsen_path", "draw_path",
    "hs_norm_sq", "increments_all", "sample_increment",
    "validate_regularity",
    "EnergyLedger", "NonConvergence", "NonFinite", "SolverConfig",
    "TrajectoryRecord", "dissipation_coercivity", "energy_residual",
    "monte_carlo", "solve_coupled", "solve_trajectory", "step",
    "MeasureGrid", "boundary_weight", "complementarity", "eta_density",
    "pair_with", "smooth_test_battery", "sweep_report", "weighted_mass",
    "CapacityEstimate", "CapacityProblem", "capacity_norm",
    "estimate_capacity", "lebesgue_lower_bound_check", "lebesgue_measure",
    "make_problem", "reflect_even", "reflected_capacity",
    "reflected_problem",
    "ConfigError", "ExperimentConfig", "build_objects", "capacity_cells",
    "fingerprint", "initial_state", "parse_config", "read_config",
    "standard_config", "to_text",
]
