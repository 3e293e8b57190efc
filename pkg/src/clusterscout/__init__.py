"""Interactive clustering engine: demonstrate the grouping you want,
get ranked models that match it."""

from .engines import (
    ClusterAssignment,
    ModelCandidate,
    run_agglomerative,
    run_dbscan,
    run_kmeans,
    run_spectral,
)
from .errors import EngineError
from .features import pca_features, select_k_best, user_features
from .metrics import (
    GroundTruthLabels,
    adjusted_rand_score,
    composite_score,
    davies_bouldin_score,
    fowlkes_mallows_score,
    homogeneity_score,
    nmi_score,
    silhouette_score,
)
from .search import RecommendationSet, enumerate_space, search
from .session import Session, WorkingLayout
from .tabular import DataTable, encode, ingest_csv, similar_by_cell

__version__ = "0.1.0"

__all__ = [
    "ClusterAssignment",
    "DataTable",
    "EngineError",
    "GroundTruthLabels",
    "ModelCandidate",
    "RecommendationSet",
    "Session",
    "WorkingLayout",
    "adjusted_rand_score",
    "composite_score",
    "davies_bouldin_score",
    "encode",
    "enumerate_space",
    "fowlkes_mallows_score",
    "homogeneity_score",
    "ingest_csv",
    "nmi_score",
    "pca_features",
    "run_agglomerative",
    "run_dbscan",
    "run_kmeans",
    "run_spectral",
    "search",
    "select_k_best",
    "silhouette_score",
    "similar_by_cell",
    "user_features",
    "__version__",
]
