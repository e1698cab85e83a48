"""Granular-ball clustering (GBCT)."""
from .cluster_formation import (
    BallGraph,
    Clustering,
    MergeRound,
    adaptive_merge,
    build_graph,
    cluster_similarity,
    detect_noise_balls,
    merge_to_k,
    point_labels,
)
from .dataset import Dataset, generate, inject_noise, load_csv, save_labels_csv, standardize
from .errors import DatasetError, DegenerateInputError, KUnreachableError
from .evaluation import accuracy, nmi
from .granular_ball import (
    BallSet,
    GranularBall,
    SplitAcceptance,
    SplitConfig,
    binary_split,
    coarse_divide,
    fit_stats,
    split_all,
)
from .pipeline import FitResult, fit

__version__ = "0.1.0"

__all__ = [
    "BallGraph", "BallSet", "Clustering", "Dataset", "DatasetError", "DegenerateInputError",
    "FitResult", "GranularBall", "KUnreachableError", "MergeRound", "SplitAcceptance",
    "SplitConfig", "accuracy", "adaptive_merge", "binary_split", "build_graph",
    "cluster_similarity", "coarse_divide", "detect_noise_balls", "fit", "fit_stats",
    "generate", "inject_noise", "load_csv", "merge_to_k", "nmi", "point_labels",
    "save_labels_csv", "split_all", "standardize",
]
