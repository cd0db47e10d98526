"""Stability toolkit for parametric nonconvex quadratic programs under
convex quadratic constraints."""

from .model import (Diagnostic, ProblemInstance, QuadraticFunction,
                    ToleranceConfig, eval_constraint, eval_objective,
                    from_dict, is_feasible, load_instance, make_instance,
                    omega_distance, save_instance, spectral_norm, to_dict,
                    validate)
from .regularity import RegularityResult, regularity_margin, slater_point
from .recession import (QprVerdict, RecessionCone, contains, qpr_solve,
                        recession_cone, unboundedness_direction)
from .solver import (SolveResult, SolverConfig, brute_force_oracle,
                     optimal_value, solution_set_estimate, solve_global)
from .stability import (ConditionReport, LegendreDecomposition,
                        PerturbationSpec, StabilityReport,
                        check_theorem_conditions, directed_infeasibility,
                        directed_objective_lift, directed_objective_shift,
                        directed_solution_split, distance_to_solution_set,
                        elliptic_part, legendre_decomposition,
                        legendre_perturbation_radius, lsc_estimate,
                        sample_perturbations, stability_sweep, usc_estimate,
                        value_continuity_estimate)
from .families import (FAMILY_IDS, make_family, make_k_not_open,
                       make_lipschitz, make_not_lsc, make_not_usc,
                       make_unbounded, not_usc_closed_form_minimizer,
                       not_usc_closed_form_value)

__version__ = "0.1.0"
