"""k-means / k-median cost: constructions, lower-bound instances, sampling and certificates."""
from __future__ import annotations

__version__ = "0.1.0"

from .constructions import build_1d_upper, build_fan_coreset, build_metric_annuli
from .coreset import build_coreset, check_geometric, validate_coreset, weigh
from .cost import centroid, cost, delta1, evaluate, evaluate_weighted, voronoi_partition
from .generators import gen_lower_1d, gen_lower_ddim, gen_random
from .geometry import CostKind, FiniteMetric, WeightedSet, distance, validate_metric
from .metricspace import estimate_doubling, gamma_estimate, greedy_cover
from .nets import build_net, verify_cover, verify_packing
from .sampling import d2_sample, overseed_experiment
from .solvers import delta_curve, enumerate_exact, estimate_L, exact_1d, lloyd_multistart, solve

__all__ = [
    "CostKind", "FiniteMetric", "WeightedSet", "distance", "validate_metric",
    "evaluate", "evaluate_weighted", "cost", "centroid", "delta1", "voronoi_partition",
    "exact_1d", "enumerate_exact", "lloyd_multistart", "solve", "estimate_L", "delta_curve",
    "d2_sample", "overseed_experiment",
    "build_net", "verify_cover", "verify_packing",
    "build_1d_upper", "build_fan_coreset", "build_metric_annuli",
    "gen_lower_1d", "gen_lower_ddim", "gen_random",
    "weigh", "check_geometric", "validate_coreset", "build_coreset",
    "greedy_cover", "estimate_doubling", "gamma_estimate",
]
