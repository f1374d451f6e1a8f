"""Bi-objective fair k-means: trade-off fronts between clustering cost and demographic balance."""

__version__ = "0.1.0"

from .datasets import Dataset, SyntheticSpec, dataset_balance, generate_gaussian_mixture, load_csv
from .fair_swap import SwapPolicy, select_target_cluster, swap_step
from .kmeans_core import closest_center, exact_recenter, init_state, minibatch_kmeans_step
from .metrics import (ClusterState, ParetoPoint, cluster_balance, clustering_cost, dominates,
                      overall_balance)
from .pareto import AlternationConfig, filter_nondominated, pareto_front_run, safairkm_run
from .sa2gd import quadratic_pair, rate_fit, sa2gd_run, weighted_gap

__all__ = [
    "AlternationConfig", "ClusterState", "Dataset", "ParetoPoint", "SwapPolicy", "SyntheticSpec",
    "closest_center", "cluster_balance", "clustering_cost", "dataset_balance", "dominates",
    "exact_recenter", "filter_nondominated", "generate_gaussian_mixture", "init_state",
    "load_csv", "minibatch_kmeans_step", "overall_balance", "pareto_front_run", "quadratic_pair",
    "rate_fit", "safairkm_run", "sa2gd_run", "select_target_cluster", "swap_step", "weighted_gap",
]
