"""Sticky gravitating gas on a line: simulation and limit-law checks.

Identical particles of mass 1/n start at rest, attract each other with a
force equal to the product of masses, and stick on contact. The package
computes when adjacent particles first share a cluster by three mutually
cross-checking engines, and runs the Monte Carlo experiments that exhibit
the limiting behavior of the cluster count:

* :mod:`stickygas.model` samples initial conditions (independent gaps,
  Poisson, uniform) and the exact Poisson-to-uniform rescaling,
* :mod:`stickygas.exact` evaluates the block-minimization formula for
  merging times, the ground-truth oracle,
* :mod:`stickygas.dynamics` is the event-driven physics engine,
* :mod:`stickygas.hull` counts clusters at a time point as strict
  vertices of a lower convex hull, O(n) per evaluation,
* :mod:`stickygas.stats` holds the replicated estimators,
* :mod:`stickygas.cli` is the batch-experiment front end.
"""

from .dynamics import Cluster, EventLog, merging_times_from_log, simulate, state_at
from .exact import (MergingTime, MergingTimes, WindowedTime, all_merging_times,
                    count_clusters, f_value, h_value, last_collision,
                    merging_time, windowed_time)
from .hull import HullProfile, cluster_count_at, cluster_count_curve, merging_time_bisect
from .model import (Configuration, IncrementModel, couple_uniform_from_poisson,
                    derive_seed, generator, sample_coupled_pair, sample_id,
                    sample_uniform)
from .stats import (CltReport, CovEstimate, DriftFormReport, EcdfEstimate,
                    Fig1Report, FitC1Result, LastCollisionReport, McEstimate,
                    PkEstimate, ProductFormulaReport, check_drift_closed_form,
                    check_product_formula, clt_check, critical_mean_constant,
                    drift_form_target, ecdf_k1, ecdf_levy_distance,
                    ecdf_sup_distance, estimate_R, estimate_a, estimate_pk,
                    fit_c1, last_collision_convergence, localization_decay,
                    reference_cluster_fraction)

__version__ = "0.1.0"

__all__ = [
    "Cluster", "CltReport", "Configuration", "CovEstimate", "DriftFormReport",
    "EcdfEstimate", "EventLog", "Fig1Report", "FitC1Result", "HullProfile",
    "IncrementModel", "LastCollisionReport", "McEstimate", "MergingTime",
    "MergingTimes", "PkEstimate", "ProductFormulaReport", "WindowedTime",
    "all_merging_times", "check_drift_closed_form", "check_product_formula",
    "clt_check", "cluster_count_at", "cluster_count_curve", "count_clusters",
    "couple_uniform_from_poisson", "critical_mean_constant", "derive_seed",
    "drift_form_target", "ecdf_k1", "ecdf_levy_distance", "ecdf_sup_distance",
    "estimate_R",
    "estimate_a", "estimate_pk", "f_value", "fit_c1", "generator", "h_value",
    "last_collision", "last_collision_convergence", "localization_decay",
    "merging_time", "merging_time_bisect", "merging_times_from_log",
    "reference_cluster_fraction", "sample_coupled_pair", "sample_id",
    "sample_uniform", "simulate", "state_at", "windowed_time",
]
