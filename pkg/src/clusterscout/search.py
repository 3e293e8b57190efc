"""Model space enumeration, ranking, and recommendations.

The search loop is deliberately exhaustive: the candidate grid never
exceeds a few dozen models, so every candidate runs, gets scored, and
the survivors are sorted under a deterministic tie-break. When the user
has demonstrated a partition, its labels act as the reference and
homogeneity drives the ranking; otherwise shifted silhouette does.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engines import (
    ClusterAssignment,
    LINKAGES,
    ModelCandidate,
    agglomerative_merges,
    run_agglomerative,
    run_dbscan,
    run_kmeans,
    run_spectral,
    spectral_embedding,
)
from .errors import EmptySpaceError, EngineError, InfeasibleError, UndefinedMetricError
from .features import FeatureSpec
from .linalg import kth_nn_dists, pairwise_dists
from .metrics import (
    NOISE,
    GroundTruthLabels,
    MetricBundle,
    composite_score,
    davies_bouldin_score,
    evaluate_agreement,
    silhouette_score,
)
from .tabular import EncodedMatrix

DEFAULT_TOP_F = 5
MISMATCH_THRESHOLD = 0.99
MAX_NOISE_FRACTION = 0.5


@dataclass
class DescriptionPayload:
    """What the recommendation panel says about one model."""

    n_clusters: int
    top_features: list[str]
    cluster_sizes: list[int]
    sentence: str


@dataclass
class ModelResult:
    candidate: ModelCandidate
    assignment: ClusterAssignment
    metrics: MetricBundle
    feature_spec: FeatureSpec
    description: DescriptionPayload
    mismatch: bool = False


@dataclass
class RecommendationSet:
    """One generation of ranked models: the one on screen plus the next f."""

    generation: int
    current_shown: ModelResult
    ranked: list[ModelResult] = field(default_factory=list)
    stale: bool = False

    @property
    def mismatch(self) -> bool:
        return self.current_shown.mismatch


def enumerate_space(
    matrix: EncodedMatrix,
    desired_k: int | None = None,
    base_seed: int = 0,
    spectral_max_rows: int = 500,
) -> list[ModelCandidate]:
    """The full candidate grid for this matrix.

    k grids run 2..10 (2..8 for spectral) capped at n-1. A desired_k
    pins every k-parameterized algorithm to that single value; dbscan
    keeps its density grid and is filtered by outcome instead.
    """
    n = matrix.n_rows
    candidates: list[ModelCandidate] = []

    def k_range(top: int) -> list[int]:
        ks = [k for k in range(2, top + 1) if k <= n - 1]
        if desired_k is not None:
            ks = [desired_k] if 2 <= desired_k <= min(top, n - 1) else []
        return ks

    for k in k_range(10):
        candidates.append(ModelCandidate("kmeans", {"k": k, "max_iter": 300, "n_init": 5}))
    if n >= 2:
        dist = pairwise_dists(matrix.values)
        kth = min(4, n - 1)
        knn = kth_nn_dists(dist, kth)
        eps_values = []
        for pct in (10, 25, 50):
            eps = float(np.percentile(knn, pct))
            if eps > 0 and eps not in eps_values:
                eps_values.append(eps)
        for eps in eps_values:
            for min_pts in (4, 8):
                candidates.append(ModelCandidate("dbscan", {"eps": eps, "min_pts": min_pts}))
    for linkage in LINKAGES:
        for k in k_range(10):
            candidates.append(ModelCandidate("agglomerative", {"k": k, "linkage": linkage}))
    if 3 <= n <= spectral_max_rows:
        for k in k_range(8):
            candidates.append(ModelCandidate("spectral", {"k": k}))
    return [
        ModelCandidate(c.algorithm, c.hyperparameters, base_seed + i)
        for i, c in enumerate(candidates)
    ]


class _SearchCaches:
    """Work shared between candidates of one search pass."""

    def __init__(self, matrix: EncodedMatrix):
        self.matrix = matrix
        self._pairwise: np.ndarray | None = None
        self._merges: dict[str, list[tuple[int, int]]] = {}
        self._embedding = None

    @property
    def pairwise(self) -> np.ndarray:
        if self._pairwise is None:
            self._pairwise = pairwise_dists(self.matrix.values)
        return self._pairwise

    def merges(self, linkage: str) -> list[tuple[int, int]]:
        if linkage not in self._merges:
            self._merges[linkage] = agglomerative_merges(self.matrix.values, linkage)
        return self._merges[linkage]

    def embedding(self):
        if self._embedding is None:
            self._embedding = spectral_embedding(self.matrix, n_components=min(8, self.matrix.n_rows))
        return self._embedding


def _run_candidate(cand: ModelCandidate, caches: _SearchCaches) -> ClusterAssignment:
    hp = cand.hyperparameters
    if cand.algorithm == "kmeans":
        return run_kmeans(
            caches.matrix,
            hp["k"],
            max_iter=hp.get("max_iter", 300),
            seed=cand.seed,
            n_init=hp.get("n_init", 5),
        )
    if cand.algorithm == "dbscan":
        return run_dbscan(caches.matrix, hp["eps"], hp["min_pts"], pairwise=caches.pairwise)
    if cand.algorithm == "agglomerative":
        return run_agglomerative(
            caches.matrix, hp["k"], hp["linkage"], merges=caches.merges(hp["linkage"])
        )
    if cand.algorithm == "spectral":
        return run_spectral(caches.matrix, hp["k"], seed=cand.seed, embedding=caches.embedding())
    raise InfeasibleError(f"unknown algorithm {cand.algorithm!r}")


def describe(
    assignment: ClusterAssignment, feature_spec: FeatureSpec
) -> DescriptionPayload:
    """Plain-language summary: cluster count, driving features, sizes.

    Quality numbers stay out of the sentence on purpose; the panel
    should read like a description, not a scoreboard.
    """
    sizes = [int((assignment.labels == c).sum()) for c in range(assignment.n_clusters)]
    tops = feature_spec.top_columns(3)
    sentence = (
        f"{assignment.n_clusters} clusters based on {', '.join(tops)}; "
        f"sizes {', '.join(str(s) for s in sizes)}."
    )
    return DescriptionPayload(
        n_clusters=assignment.n_clusters,
        top_features=tops,
        cluster_sizes=sizes,
        sentence=sentence,
    )


def search(
    matrix: EncodedMatrix,
    candidates: list[ModelCandidate],
    truth: GroundTruthLabels | None = None,
    feature_spec: FeatureSpec | None = None,
    f: int = DEFAULT_TOP_F,
    generation: int = 1,
    desired_k: int | None = None,
) -> RecommendationSet:
    """Run every candidate, score, sort, deduplicate, and take the top.

    Returns a set whose current_shown is the single best model and whose
    ranked list holds the next f distinct partitions. Raises
    EmptySpaceError with per-candidate reasons if nothing survives.
    """
    if not candidates:
        raise EmptySpaceError({})
    spec = feature_spec if feature_spec is not None else FeatureSpec(mode="user")
    caches = _SearchCaches(matrix)
    scored: list[tuple[tuple, ModelResult]] = []
    failures: dict[str, str] = {}
    for cand in candidates:
        try:
            assignment = _run_candidate(cand, caches)
            noise = int((assignment.labels == NOISE).sum())
            if noise * 2 > len(assignment.labels):
                raise InfeasibleError(f"{noise}/{len(assignment.labels)} items are noise")
            if (
                desired_k is not None
                and cand.algorithm == "dbscan"
                and assignment.n_clusters != desired_k
            ):
                raise InfeasibleError(
                    f"found {assignment.n_clusters} clusters, wanted {desired_k}"
                )
        except EngineError as exc:
            failures[f"{cand.label()}#{cand.seed}"] = str(exc)
            continue
        bundle = _score(assignment, caches, truth)
        result = ModelResult(
            candidate=cand,
            assignment=assignment,
            metrics=bundle,
            feature_spec=spec,
            description=describe(assignment, spec),
            mismatch=truth is not None
            and (bundle.homogeneity is None or bundle.homogeneity < MISMATCH_THRESHOLD),
        )
        sil_key = bundle.silhouette if bundle.silhouette is not None else -2.0
        key = (-bundle.score, -sil_key) + result.candidate.sort_key()
        scored.append((key, result))
    if not scored:
        raise EmptySpaceError(failures)
    scored.sort(key=lambda pair: pair[0])
    kept: list[ModelResult] = []
    seen: set = set()
    for _, result in scored:
        sig = result.assignment.signature()
        if sig in seen:
            continue
        seen.add(sig)
        kept.append(result)
    return RecommendationSet(
        generation=generation,
        current_shown=kept[0],
        ranked=kept[1 : 1 + max(0, f)],
    )


def _score(
    assignment: ClusterAssignment, caches: _SearchCaches, truth: GroundTruthLabels | None
) -> MetricBundle:
    bundle = MetricBundle()
    try:
        bundle.silhouette = silhouette_score(
            caches.matrix.values, assignment.labels, pairwise=caches.pairwise
        )
    except UndefinedMetricError:
        bundle.silhouette = None
    try:
        bundle.davies_bouldin = davies_bouldin_score(caches.matrix.values, assignment.labels)
    except UndefinedMetricError:
        bundle.davies_bouldin = None
    if truth is not None:
        try:
            agreement = evaluate_agreement(assignment.item_ids, assignment.labels, truth)
        except UndefinedMetricError:
            agreement = None
        if agreement is not None:
            bundle.homogeneity = agreement["homogeneity"]
            bundle.adjusted_rand = agreement["adjusted_rand"]
            bundle.fowlkes_mallows = agreement["fowlkes_mallows"]
            bundle.nmi = agreement["nmi"]
    n_items = len(assignment.item_ids)
    covered = n_items - len(assignment.noise_items())
    coverage = covered / n_items if n_items else 0.0
    bundle.score = composite_score(bundle.silhouette, bundle.homogeneity, coverage)
    return bundle
