"""Gaussian wave process for MAX-CUT on high-girth regular graphs.

Library + CLI covering graph generation, the distance-shell linear filter,
sign rounding with a one-round greedy flip on a marked vertex fraction,
exact infinite-tree predictions, Monte Carlo estimation, and parameter
sweeps.
"""

__version__ = "0.1.0"

from .estimator import (EstimateSummary, ExperimentResult, MetricSummary, RunConfig,
                        TrialResult, cut_fraction, edge_correlation, run_experiment,
                        run_experiment_multi, run_trial, run_trial_multi,
                        stratified_edge_stats, summarise_trials)
from .filters import (CoefficientSchedule, geometric_schedule, init_gaussian,
                      multi_shell_update, one_step_update, parse_schedule, tanh_dynamics)
from .graphs import (ACYCLIC, DistanceShells, Graph, GraphFormatError,
                     GraphGenerationError, build_tree, complete_graph, cycle_graph,
                     from_edge_array, generate_regular, girth, girth_at_least,
                     is_locally_tree_like, load_graph, neighbor_sums, petersen,
                     save_graph, shells, tree_ball_size, tree_like_fraction)
from .oracle import (brute_force_max_cut, dense_ball_filter,
                     mc_bivariate_sign_correlation, tree_mc_correlation)
from .rounding import MarkSet, greedy_flip, mark_vertices, round_signs, threshold_flip
from .sweep import (BudgetExceededError, EpsilonOptimum, QuadraticFit, SweepReport,
                    SweepSpec, fit_epsilon_quadratic, grid_sweep, optimize_epsilon,
                    optimize_schedule)
from .theory import (TreeCorrelation, asymptotic_rho, exact_tree_correlation,
                     predicted_cut_fraction, reference_constants, scaled_constant,
                     sheppard, tree_shell_count)

__all__ = [name for name in dir() if not name.startswith("_")]
