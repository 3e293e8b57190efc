"""Clustering algorithms over an encoded feature matrix.

Four engines share one assignment shape: centroid partitioning
(k-means), density clustering with an explicit noise label (dbscan),
hierarchical merging under three linkage rules, and spectral embedding
of a Gaussian affinity graph followed by k-means in eigenvector space.
Every engine is deterministic for a fixed seed and breaks ties by the
lowest item id so repeated runs agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InfeasibleKError,
    TooSmallClusterError,
    ValidationError,
)
from .linalg import jacobi_eigh, kth_nn_dists, pairwise_dists, pairwise_sq_dists
from .metrics import NOISE
from .tabular import EncodedMatrix

LINKAGES = ("ward", "average", "complete")


@dataclass(frozen=True)
class ModelCandidate:
    """One point of the model space: an algorithm plus its knob settings."""

    algorithm: str
    hyperparameters: dict
    seed: int = 0

    def label(self) -> str:
        knobs = ",".join(f"{k}={_fmt(v)}" for k, v in sorted(self.hyperparameters.items()))
        return f"{self.algorithm}({knobs})"

    def sort_key(self) -> tuple:
        return (self.algorithm, tuple(sorted(self.hyperparameters.items())))


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


@dataclass
class ClusterAssignment:
    """A labelling of a set of items, plus the geometry behind it.

    labels holds one cluster id per entry of item_ids, with NOISE (-1)
    marking unclustered items. Centroids are per-cluster means in the
    encoded space, indexed by cluster id.
    """

    item_ids: np.ndarray
    labels: np.ndarray
    n_clusters: int
    centroids: np.ndarray
    inertia: float
    inertia_history: list[float] = field(default_factory=list)
    repair_count: int = 0

    def clusters(self) -> dict[int, np.ndarray]:
        """Cluster id -> member item ids (noise excluded)."""
        out: dict[int, np.ndarray] = {}
        for cid in range(self.n_clusters):
            out[cid] = self.item_ids[self.labels == cid]
        return out

    def noise_items(self) -> np.ndarray:
        return self.item_ids[self.labels == NOISE]

    def signature(self) -> tuple:
        """Hashable identity of the partition, noise kept separate."""
        groups = frozenset(
            frozenset(int(i) for i in members) for members in self.clusters().values() if len(members)
        )
        noise = frozenset(int(i) for i in self.noise_items())
        return (groups, noise)


def _finalize(values: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, int, np.ndarray, float]:
    """Relabel clusters compactly by first touch; compute centroids and inertia."""
    compact = _relabel_first_touch(labels)
    k = int(compact.max()) + 1 if (compact != NOISE).any() else 0
    if k == 0:
        return compact, 0, np.empty((0, values.shape[1])), 0.0
    centroids = np.stack([values[compact == c].mean(axis=0) for c in range(k)])
    keep = compact != NOISE
    diffs = values[keep] - centroids[compact[keep]]
    inertia = float(np.einsum("ij,ij->", diffs, diffs))
    return compact, k, centroids, inertia


def _materialize(matrix: EncodedMatrix) -> tuple[np.ndarray, np.ndarray]:
    values = matrix.values if isinstance(matrix, EncodedMatrix) else np.asarray(matrix, dtype=float)
    item_ids = (
        matrix.item_ids if isinstance(matrix, EncodedMatrix) else np.arange(len(values), dtype=int)
    )
    return values, item_ids


# ---------------------------------------------------------------------------
# k-means


def run_kmeans(
    matrix: EncodedMatrix,
    k: int,
    max_iter: int = 300,
    seed: int = 0,
    n_init: int = 1,
) -> ClusterAssignment:
    """Lloyd iterations from k-means++ starts; the best of n_init runs wins.

    Ties in the assignment step keep the previous label, and a cluster
    that empties is repaired by re-seeding it on the farthest point of
    any multi-member cluster, so per-iteration inertia never increases.
    """
    values, item_ids = _materialize(matrix)
    n = len(values)
    if n == 0:
        raise ValidationError("cannot cluster an empty matrix")
    if not 2 <= k <= n:
        raise InfeasibleKError(f"k={k} infeasible for {n} rows")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(1, n_init)):
        labels, history, repairs = _lloyd(values, k, max_iter, rng)
        inertia = _mean_inertia(values, labels, k)
        if best is None or inertia < best[1]:
            best = (labels, inertia, history, repairs)
    raw_labels, _, history, repairs = best
    labels, n_clusters, centroids, inertia = _finalize(values, raw_labels)
    return ClusterAssignment(
        item_ids=item_ids,
        labels=labels,
        n_clusters=n_clusters,
        centroids=centroids,
        inertia=inertia,
        inertia_history=history,
        repair_count=repairs,
    )


def _relabel_first_touch(labels: np.ndarray) -> np.ndarray:
    order: dict[int, int] = {}
    out = np.empty(len(labels), dtype=int)
    for i, lab in enumerate(labels):
        lab = int(lab)
        if lab == NOISE:
            out[i] = NOISE
            continue
        if lab not in order:
            order[lab] = len(order)
        out[i] = order[lab]
    return out


def _mean_inertia(values: np.ndarray, labels: np.ndarray, k: int) -> float:
    total = 0.0
    for c in range(k):
        members = values[labels == c]
        if len(members):
            mu = members.mean(axis=0)
            total += float(((members - mu) ** 2).sum())
    return total


def _kmeans_pp(values: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(values)
    centers = np.empty((k, values.shape[1]))
    first = int(rng.integers(n))
    centers[0] = values[first]
    closest = ((values - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = float(closest.sum())
        if total <= 0.0:
            pick = int(rng.integers(n))
        else:
            pick = int(rng.choice(n, p=closest / total))
        centers[j] = values[pick]
        closest = np.minimum(closest, ((values - centers[j]) ** 2).sum(axis=1))
    return centers


def _lloyd(
    values: np.ndarray, k: int, max_iter: int, rng: np.random.Generator
) -> tuple[np.ndarray, list[float], int]:
    n = len(values)
    rows = np.arange(n)
    centers = _kmeans_pp(values, k, rng)
    labels: np.ndarray | None = None
    history: list[float] = []
    repairs = 0
    for _ in range(max_iter):
        d2 = _dists_to_centers(values, centers)
        new_labels = d2.argmin(axis=1)
        if labels is not None:
            unchanged = d2[rows, labels] <= d2[rows, new_labels]
            new_labels = np.where(unchanged, labels, new_labels)
        counts = np.bincount(new_labels, minlength=k)
        moved: list[int] = []
        for empty in np.flatnonzero(counts == 0):
            own = d2[rows, new_labels].copy()
            eligible = counts[new_labels] >= 2
            if moved:
                eligible[moved] = False
            own[~eligible] = -np.inf
            far = int(own.argmax())
            counts[new_labels[far]] -= 1
            new_labels[far] = empty
            counts[empty] = 1
            centers[empty] = values[far]
            d2[:, empty] = ((values - centers[empty]) ** 2).sum(axis=1)
            moved.append(far)
            repairs += 1
        history.append(float(d2[rows, new_labels].sum()))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            centers[c] = values[labels == c].mean(axis=0)
    return labels, history, repairs


def _dists_to_centers(values: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = (
        np.einsum("ij,ij->i", values, values)[:, None]
        + np.einsum("ij,ij->i", centers, centers)[None, :]
        - 2.0 * values @ centers.T
    )
    np.maximum(d2, 0.0, out=d2)
    return d2


# ---------------------------------------------------------------------------
# dbscan


def run_dbscan(
    matrix: EncodedMatrix,
    eps: float,
    min_pts: int,
    pairwise: np.ndarray | None = None,
) -> ClusterAssignment:
    """Density clustering. Core items (>= min_pts neighbours within eps,
    self included) form clusters via density connectivity; border items
    attach to their nearest core; the rest are NOISE.
    """
    values, item_ids = _materialize(matrix)
    n = len(values)
    if n == 0:
        raise ValidationError("cannot cluster an empty matrix")
    if eps <= 0:
        raise ValidationError(f"eps must be positive, got {eps}")
    if min_pts < 2:
        raise ValidationError(f"min_pts must be at least 2, got {min_pts}")
    dist = pairwise if pairwise is not None else pairwise_dists(values)
    within = dist <= eps
    core = within.sum(axis=1) >= min_pts
    labels = np.full(n, NOISE, dtype=int)
    comp = 0
    for start in np.flatnonzero(core):
        if labels[start] != NOISE:
            continue
        frontier = [int(start)]
        labels[start] = comp
        while frontier:
            node = frontier.pop()
            neighbours = np.flatnonzero(within[node] & core)
            for nb in neighbours:
                if labels[nb] == NOISE:
                    labels[nb] = comp
                    frontier.append(int(nb))
        comp += 1
    # border items: non-core within eps of some core join the nearest core's cluster
    border = np.flatnonzero(~core & (within & core[None, :]).any(axis=1))
    for idx in border:
        cand = dist[idx].copy()
        cand[~core] = np.inf
        labels[idx] = labels[int(cand.argmin())]
    labels, n_clusters, centroids, inertia = _finalize(values, labels)
    return ClusterAssignment(
        item_ids=item_ids,
        labels=labels,
        n_clusters=n_clusters,
        centroids=centroids,
        inertia=inertia,
    )


# ---------------------------------------------------------------------------
# agglomerative


def agglomerative_merges(values: np.ndarray, linkage: str) -> list[tuple[int, int]]:
    """Full merge sequence (n-1 steps) under a Lance-Williams update.

    Each step records (survivor, absorbed) as positional row indices,
    survivor being the side holding the lowest original row. Ties on
    merge distance resolve to the lexicographically smallest pair of
    representatives.
    """
    if linkage not in LINKAGES:
        raise ValidationError(f"unknown linkage {linkage!r}")
    n = len(values)
    d = pairwise_sq_dists(values)
    if linkage != "ward":
        np.sqrt(d, out=d)
    np.fill_diagonal(d, np.inf)
    active = np.ones(n, dtype=bool)
    sizes = np.ones(n, dtype=float)
    reps = np.arange(n)
    nn_dist = d.min(axis=1)
    nn_idx = d.argmin(axis=1)
    merges: list[tuple[int, int]] = []
    for _ in range(n - 1):
        masked = np.where(active, nn_dist, np.inf)
        closest = masked.min()
        best: tuple[tuple[int, int], int, int] | None = None
        for i in np.flatnonzero(masked == closest):
            for j in np.flatnonzero(d[i] == closest):
                key = (min(reps[i], reps[j]), max(reps[i], reps[j]))
                if best is None or key < best[0]:
                    best = (key, int(i), int(j))
        _, i, j = best
        if reps[j] < reps[i]:
            i, j = j, i
        merges.append((int(reps[i]), int(reps[j])))
        d_ij = d[i, j]
        si, sj = sizes[i], sizes[j]
        if linkage == "ward":
            sc = sizes
            row = ((si + sc) * d[i] + (sj + sc) * d[j] - sc * d_ij) / (si + sj + sc)
        elif linkage == "average":
            row = (si * d[i] + sj * d[j]) / (si + sj)
        else:
            row = np.maximum(d[i], d[j])
        row[~active] = np.inf
        row[i] = np.inf
        row[j] = np.inf
        d[i, :] = row
        d[:, i] = row
        d[j, :] = np.inf
        d[:, j] = np.inf
        active[j] = False
        sizes[i] = si + sj
        nn_dist[i] = row.min()
        nn_idx[i] = int(row.argmin())
        improved = active & (row < nn_dist)
        improved[i] = False
        nn_dist[improved] = row[improved]
        nn_idx[improved] = i
        stale = active & ((nn_idx == i) | (nn_idx == j)) & ~improved
        stale[i] = False
        stale_rows = np.flatnonzero(stale)
        if len(stale_rows):
            block = d[stale_rows]
            nn_dist[stale_rows] = block.min(axis=1)
            nn_idx[stale_rows] = block.argmin(axis=1)
    return merges


def run_agglomerative(
    matrix: EncodedMatrix,
    k: int,
    linkage: str = "ward",
    merges: list[tuple[int, int]] | None = None,
) -> ClusterAssignment:
    """Cut the merge tree at k clusters."""
    values, item_ids = _materialize(matrix)
    n = len(values)
    if n == 0:
        raise ValidationError("cannot cluster an empty matrix")
    if not 2 <= k <= n:
        raise InfeasibleKError(f"k={k} infeasible for {n} rows")
    if merges is None:
        merges = agglomerative_merges(values, linkage)
    parent = np.arange(n)

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in merges[: n - k]:
        ra, rb = find(a), find(b)
        parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(i) for i in range(n)])
    labels, n_clusters, centroids, inertia = _finalize(values, roots)
    return ClusterAssignment(
        item_ids=item_ids,
        labels=labels,
        n_clusters=n_clusters,
        centroids=centroids,
        inertia=inertia,
    )


# ---------------------------------------------------------------------------
# spectral


def spectral_embedding(
    matrix: EncodedMatrix, n_components: int = 8
) -> tuple[np.ndarray, np.ndarray]:
    """Bottom eigenvectors of the symmetric normalized graph Laplacian.

    Affinity is a Gaussian kernel exp(-gamma * d^2) with gamma set to
    one over the number of dimensions carrying nonzero weight, so
    zero-weighted features cannot dilute the kernel bandwidth.
    """
    values, _ = _materialize(matrix)
    n = len(values)
    if n < 3:
        raise InfeasibleKError(f"spectral embedding needs at least 3 rows, got {n}")
    active = matrix.n_active_dims if isinstance(matrix, EncodedMatrix) else values.shape[1]
    gamma = 1.0 / max(1, active)
    affinity = np.exp(-gamma * pairwise_sq_dists(values))
    degree = affinity.sum(axis=1)
    inv_root = 1.0 / np.sqrt(degree)
    lap = -affinity * inv_root[:, None] * inv_root[None, :]
    lap[np.arange(n), np.arange(n)] += 1.0
    lap = 0.5 * (lap + lap.T)
    vals, vecs = jacobi_eigh(lap)
    m = min(n_components, n)
    return vals[:m], vecs[:, :m]


def run_spectral(
    matrix: EncodedMatrix,
    k: int,
    seed: int = 0,
    embedding: tuple[np.ndarray, np.ndarray] | None = None,
) -> ClusterAssignment:
    """k-means on the row-normalized spectral embedding.

    Reported centroids and inertia live in the original encoded space,
    not the embedding, so results are comparable across engines.
    """
    values, item_ids = _materialize(matrix)
    n = len(values)
    if n < 3:
        raise InfeasibleKError(f"spectral clustering needs at least 3 rows, got {n}")
    if not 2 <= k <= min(n, 8):
        raise InfeasibleKError(f"k={k} infeasible for spectral clustering of {n} rows")
    if embedding is None:
        embedding = spectral_embedding(matrix, n_components=min(8, n))
    _, vecs = embedding
    basis = vecs[:, :k]
    norms = np.linalg.norm(basis, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    sub = run_kmeans(basis / norms, k, max_iter=300, seed=seed, n_init=5)
    labels, n_clusters, centroids, inertia = _finalize(values, sub.labels)
    return ClusterAssignment(
        item_ids=item_ids,
        labels=labels,
        n_clusters=n_clusters,
        centroids=centroids,
        inertia=inertia,
    )


# ---------------------------------------------------------------------------
# sub-clustering

SUBCLUSTER_ROTATION: tuple[ModelCandidate, ...] = (
    ModelCandidate("kmeans", {"k": 2}),
    ModelCandidate("kmeans", {"k": 3}),
    ModelCandidate("agglomerative", {"k": 2, "linkage": "ward"}),
    ModelCandidate("kmeans", {"k": 4}),
    ModelCandidate("agglomerative", {"k": 3, "linkage": "average"}),
    ModelCandidate("dbscan", {"min_pts": 4}),
)


@dataclass
class SubClusterModel:
    """One throwaway model applied inside a single cluster."""

    members: np.ndarray
    candidate: ModelCandidate
    assignment: ClusterAssignment
    refresh_count: int
    rotation_index: int


def run_subcluster(
    matrix: EncodedMatrix,
    members: np.ndarray,
    previous: SubClusterModel | None = None,
    seed: int = 0,
) -> SubClusterModel:
    """Split one cluster with the next model from a fixed rotation.

    Each re-roll advances the rotation so consecutive requests never
    reuse the same algorithm/hyperparameter pair; infeasible entries
    (dbscan with a degenerate eps) are skipped.
    """
    members = np.asarray(sorted(int(m) for m in members), dtype=int)
    if len(members) < 4:
        raise TooSmallClusterError(
            f"sub-clustering needs at least 4 items, cluster has {len(members)}"
        )
    sub = matrix.restrict(members)
    start = 0 if previous is None else (previous.rotation_index + 1) % len(SUBCLUSTER_ROTATION)
    for step in range(len(SUBCLUSTER_ROTATION)):
        idx = (start + step) % len(SUBCLUSTER_ROTATION)
        proto = SUBCLUSTER_ROTATION[idx]
        if proto.algorithm == "dbscan":
            dist = pairwise_dists(sub.values)
            kth = min(4, len(members) - 1)
            eps = float(np.median(kth_nn_dists(dist, kth)))
            if eps <= 0.0:
                continue
            candidate = ModelCandidate("dbscan", {"eps": eps, "min_pts": proto.hyperparameters["min_pts"]}, seed)
            assignment = run_dbscan(sub, eps, proto.hyperparameters["min_pts"], pairwise=dist)
        elif proto.algorithm == "agglomerative":
            candidate = ModelCandidate(proto.algorithm, dict(proto.hyperparameters), seed)
            assignment = run_agglomerative(sub, proto.hyperparameters["k"], proto.hyperparameters["linkage"])
        else:
            candidate = ModelCandidate(proto.algorithm, dict(proto.hyperparameters), seed)
            assignment = run_kmeans(sub, proto.hyperparameters["k"], seed=seed, n_init=5)
        return SubClusterModel(
            members=members,
            candidate=candidate,
            assignment=assignment,
            refresh_count=0 if previous is None else previous.refresh_count + 1,
            rotation_index=idx,
        )
    raise TooSmallClusterError("no feasible sub-clustering model for this cluster")
