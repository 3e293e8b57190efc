"""Working layout state, demonstration ops, and one user's session.

The working layout is the partition on screen: named clusters the user
built or loaded, a set of deleted items, and an append-only op log that
replays to the exact same state. Every mutation flows through
WorkingLayout.apply so live edits and replays share one code path.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .config import Config, load_config
from .engines import SubClusterModel, run_subcluster
from .errors import (
    NoLabelsError,
    StaleGenerationError,
    TooSmallClusterError,
    UnknownTargetError,
    ValidationError,
)
from .features import (
    FeatureSpec,
    apply_features,
    default_features,
    select_k_best,
    user_features,
)
from .metrics import GroundTruthLabels
from .search import (
    DEFAULT_TOP_F,
    ModelResult,
    RecommendationSet,
    enumerate_space,
    search,
)
from .tabular import NUMERIC, DataTable, EncodedMatrix, SelectionSet, similar_by_cell

OP_KINDS = (
    "create_from_selection",
    "merge",
    "split_out",
    "remove_items",
    "remove_cluster",
    "set_weights",
    "load_recommendation",
)


@dataclass
class DemonstrationOp:
    kind: str
    payload: dict
    timestamp: float

    def to_json(self) -> str:
        return json.dumps(
            {"kind": self.kind, "payload": self.payload, "timestamp": self.timestamp},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, line: str) -> "DemonstrationOp":
        raw = json.loads(line)
        kind = raw.get("kind")
        if kind not in OP_KINDS:
            raise ValidationError(f"unknown op kind {kind!r}")
        return cls(kind=kind, payload=raw.get("payload", {}), timestamp=raw.get("timestamp", 0.0))


@dataclass
class OpOutcome:
    noop: bool = False
    cluster_id: int | None = None


@dataclass
class WorkingCluster:
    cluster_id: int
    members: set[int]
    color_tag: int
    origin: str = "user"
    subpanel: SubClusterModel | None = None
    subpanel_feature: str | None = None


class WorkingLayout:
    """The user-visible partition plus its op history."""

    def __init__(self, n_rows: int):
        self.n_rows = n_rows
        self.clusters: list[WorkingCluster] = []
        self.deleted_items: set[int] = set()
        self.history: list[DemonstrationOp] = []
        self._next_cluster_id = 0
        self._next_color = 0

    # -- queries ----------------------------------------------------------

    def get_cluster(self, cluster_id: int) -> WorkingCluster:
        for cluster in self.clusters:
            if cluster.cluster_id == cluster_id:
                return cluster
        raise UnknownTargetError(f"unknown cluster {cluster_id}")

    def assigned_items(self) -> set[int]:
        out: set[int] = set()
        for cluster in self.clusters:
            out |= cluster.members
        return out

    def unassigned_items(self) -> set[int]:
        return set(range(self.n_rows)) - self.assigned_items() - self.deleted_items

    def derive_truth(self) -> GroundTruthLabels:
        """Working clusters as reference classes, in creation order."""
        if not self.clusters:
            raise NoLabelsError("no clusters to derive labels from")
        labels: dict[int, int] = {}
        for cls, cluster in enumerate(self.clusters):
            for item in cluster.members:
                labels[item] = cls
        return GroundTruthLabels(labels)

    def to_jsonl(self) -> str:
        return "".join(op.to_json() + "\n" for op in self.history)

    @classmethod
    def replay(cls, ops: list[DemonstrationOp], n_rows: int) -> "WorkingLayout":
        layout = cls(n_rows)
        for op in ops:
            layout.apply(op.kind, op.payload, timestamp=op.timestamp)
        return layout

    # -- mutation ---------------------------------------------------------

    def apply(self, kind: str, payload: dict, timestamp: float | None = None) -> OpOutcome:
        """Validate and apply one demonstration op, appending to history.

        A no-op (splitting out a whole existing cluster) is flagged and
        left out of the history so replays stay minimal.
        """
        if kind not in OP_KINDS:
            raise ValidationError(f"unknown op kind {kind!r}")
        handler = getattr(self, f"_op_{kind}")
        outcome = handler(payload)
        if not outcome.noop:
            self.history.append(
                DemonstrationOp(
                    kind=kind,
                    payload=payload,
                    timestamp=time.time() if timestamp is None else timestamp,
                )
            )
        return outcome

    def _items_of(self, payload: dict, key: str = "items") -> list[int]:
        items = payload.get(key)
        if not items:
            raise ValidationError(f"op payload needs a non-empty {key!r} list")
        out = sorted({int(i) for i in items})
        for item in out:
            if not 0 <= item < self.n_rows:
                raise UnknownTargetError(f"item {item} out of range")
        return out

    def _reject_deleted(self, items: list[int]) -> None:
        hit = sorted(set(items) & self.deleted_items)
        if hit:
            raise ValidationError(f"items already deleted: {hit}")

    def _new_cluster(self, members: set[int], origin: str) -> WorkingCluster:
        cluster = WorkingCluster(
            cluster_id=self._next_cluster_id,
            members=members,
            color_tag=self._next_color,
            origin=origin,
        )
        self._next_cluster_id += 1
        self._next_color += 1
        self.clusters.append(cluster)
        return cluster

    def _pull_items(self, wanted: set[int]) -> None:
        """Remove the given items from every cluster, dropping emptied ones."""
        survivors = []
        for cluster in self.clusters:
            overlap = cluster.members & wanted
            if overlap:
                cluster.members -= overlap
                cluster.subpanel = None
                cluster.subpanel_feature = None
            if cluster.members:
                survivors.append(cluster)
        self.clusters = survivors

    def _op_create_from_selection(self, payload: dict) -> OpOutcome:
        items = self._items_of(payload)
        self._reject_deleted(items)
        wanted = set(items)
        self._pull_items(wanted)
        cluster = self._new_cluster(wanted, origin="user")
        return OpOutcome(cluster_id=cluster.cluster_id)

    def _op_merge(self, payload: dict) -> OpOutcome:
        try:
            a = int(payload["a"])
            b = int(payload["b"])
        except (KeyError, TypeError, ValueError):
            raise ValidationError("merge needs integer cluster ids 'a' and 'b'") from None
        if a == b:
            raise ValidationError("cannot merge a cluster with itself")
        src = self.get_cluster(a)
        dst = self.get_cluster(b)
        dst.members |= src.members
        dst.subpanel = None
        dst.subpanel_feature = None
        self.clusters.remove(src)
        return OpOutcome(cluster_id=dst.cluster_id)

    def _op_split_out(self, payload: dict) -> OpOutcome:
        items = self._items_of(payload)
        self._reject_deleted(items)
        wanted = set(items)
        for cluster in self.clusters:
            if cluster.members == wanted:
                return OpOutcome(noop=True, cluster_id=cluster.cluster_id)
        self._pull_items(wanted)
        cluster = self._new_cluster(wanted, origin="user")
        return OpOutcome(cluster_id=cluster.cluster_id)

    def _op_remove_items(self, payload: dict) -> OpOutcome:
        items = self._items_of(payload)
        wanted = set(items)
        self._pull_items(wanted)
        self.deleted_items |= wanted
        return OpOutcome()

    def _op_remove_cluster(self, payload: dict) -> OpOutcome:
        try:
            cid = int(payload["cluster_id"])
        except (KeyError, TypeError, ValueError):
            raise ValidationError("remove_cluster needs an integer 'cluster_id'") from None
        cluster = self.get_cluster(cid)
        self.deleted_items |= cluster.members
        self.clusters.remove(cluster)
        return OpOutcome()

    def _op_set_weights(self, payload: dict) -> OpOutcome:
        if not payload.get("weights"):
            raise ValidationError("set_weights needs a non-empty 'weights' map")
        # recorded for replay; the session owns the actual feature spec swap
        return OpOutcome()

    def _op_load_recommendation(self, payload: dict) -> OpOutcome:
        groups = payload.get("clusters")
        if not isinstance(groups, list) or not groups:
            raise ValidationError("load_recommendation needs a non-empty 'clusters' list")
        seen: set[int] = set()
        cleaned: list[set[int]] = []
        for group in groups:
            members = {int(i) for i in group}
            if not members:
                raise ValidationError("load_recommendation clusters must be non-empty")
            if members & seen:
                raise ValidationError("load_recommendation clusters must be disjoint")
            for item in members:
                if not 0 <= item < self.n_rows:
                    raise UnknownTargetError(f"item {item} out of range")
            self._reject_deleted(sorted(members))
            seen |= members
            cleaned.append(members)
        self.clusters = []
        for members in cleaned:
            self._new_cluster(members, origin="model")
        return OpOutcome()


# ---------------------------------------------------------------------------
# per-cluster distribution charts


@dataclass
class Histogram:
    feature: str
    kind: str
    counts: list[int]
    bin_edges: list[float] | None = None
    categories: list[str] | None = None


def feature_histogram(table: DataTable, feature: str, item_ids) -> Histogram:
    """Distribution of one column over the given items.

    Numeric columns use 10 equal-width bins spanning the column's range
    over the whole dataset, so charts for two clusters line up
    bar-for-bar. Missing cells are left out of the counts.
    """
    spec = table.column(feature)
    items = sorted(int(i) for i in item_ids)
    if spec.kind == NUMERIC:
        values, missing = table.numeric_values(feature)
        keep = [i for i in items if not missing[i]]
        lo = spec.numeric_stats.minimum
        hi = spec.numeric_stats.maximum
        if hi > lo:
            edges = np.linspace(lo, hi, 11)
            counts, _ = np.histogram(values[keep], bins=edges)
        else:
            edges = np.full(11, lo)
            counts = np.zeros(10, dtype=int)
            counts[0] = len(keep)
        return Histogram(
            feature=feature,
            kind="numeric",
            counts=[int(c) for c in counts],
            bin_edges=[float(e) for e in edges],
        )
    cats = list(spec.categories)
    index = {c: i for i, c in enumerate(cats)}
    counts = [0] * len(cats)
    for i in items:
        cell = table.cell(i, feature)
        slot = index.get(cell.strip())
        if slot is not None:
            counts[slot] += 1
    return Histogram(feature=feature, kind="categorical", counts=counts, categories=cats)


# ---------------------------------------------------------------------------
# display coordinates


@dataclass
class ItemPoint:
    item_id: int
    cluster_id: int
    x: float
    y: float


@dataclass
class ClusterAnchor:
    cluster_id: int
    x: float
    y: float
    radius: float


@dataclass
class LayoutCoordinates:
    points: list[ItemPoint]
    anchors: list[ClusterAnchor]


_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


def layout_coords(layout: WorkingLayout, matrix: EncodedMatrix) -> LayoutCoordinates:
    """Deterministic 2D placement in the unit square.

    Cluster anchors pack greedily along a spiral, larger clusters first.
    Inside a cluster, items sit on a phyllotaxis spiral ordered by
    distance to the cluster's encoded centroid, so an item's display
    radius grows strictly with its dissimilarity rank.
    """
    if not layout.clusters:
        raise ValidationError("layout has no clusters to place")
    order = sorted(layout.clusters, key=lambda c: (-len(c.members), c.cluster_id))
    total = sum(len(c.members) for c in order)
    base = math.sqrt(0.22 / (math.pi * max(1, total)))
    anchors: list[ClusterAnchor] = []
    placed: list[ClusterAnchor] = []
    for cluster in order:
        radius = min(base * math.sqrt(len(cluster.members)), 0.24)
        anchor = _place_anchor(placed, radius)
        anchor = ClusterAnchor(cluster.cluster_id, anchor[0], anchor[1], radius)
        placed.append(anchor)
        anchors.append(anchor)
    anchors.sort(key=lambda a: a.cluster_id)

    lookup = {int(item): row for row, item in enumerate(matrix.item_ids)}
    points: list[ItemPoint] = []
    for anchor in anchors:
        cluster = layout.get_cluster(anchor.cluster_id)
        members = sorted(cluster.members)
        rows = [lookup[m] for m in members if m in lookup]
        if len(rows) != len(members):
            missing = [m for m in members if m not in lookup]
            raise UnknownTargetError(f"items missing from matrix: {missing}")
        block = matrix.values[rows]
        centroid = block.mean(axis=0)
        dists = np.linalg.norm(block - centroid, axis=1)
        ranked = sorted(range(len(members)), key=lambda i: (dists[i], members[i]))
        size = len(members)
        for rank, idx in enumerate(ranked):
            r = anchor.radius * 0.85 * math.sqrt((rank + 0.5) / size)
            theta = rank * _GOLDEN_ANGLE
            points.append(
                ItemPoint(
                    item_id=members[idx],
                    cluster_id=anchor.cluster_id,
                    x=anchor.x + r * math.cos(theta),
                    y=anchor.y + r * math.sin(theta),
                )
            )
    points.sort(key=lambda p: p.item_id)
    return LayoutCoordinates(points=points, anchors=anchors)


def _place_anchor(placed: list[ClusterAnchor], radius: float) -> tuple[float, float]:
    if not placed:
        return 0.5, 0.5
    margin = 0.01
    step = 0.035
    t = 0.0
    while t < 400.0:
        t += 1.0
        r = step * math.sqrt(t)
        theta = t * _GOLDEN_ANGLE
        x = 0.5 + r * math.cos(theta)
        y = 0.5 + r * math.sin(theta)
        if not (radius <= x <= 1 - radius and radius <= y <= 1 - radius):
            continue
        ok = True
        for other in placed:
            gap = math.hypot(x - other.x, y - other.y)
            if gap < radius + other.radius + margin:
                ok = False
                break
        if ok:
            return x, y
    # fall back to the corner grid if the spiral never found room
    return max(radius, min(1 - radius, 0.5)), max(radius, min(1 - radius, 0.5))


# ---------------------------------------------------------------------------
# export


def export_csv(layout: WorkingLayout, table: DataTable) -> str:
    """Original rows plus a trailing cluster tag column, RFC 4180 framed."""
    if not layout.clusters:
        raise ValidationError("nothing to export: layout has no clusters")
    membership: dict[int, int] = {}
    for cluster in layout.clusters:
        for item in cluster.members:
            membership[item] = cluster.cluster_id
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(table.column_names() + ["cluster"])
    for item in range(table.n_rows):
        if item in membership:
            tag = str(membership[item])
        elif item in layout.deleted_items:
            tag = "deleted"
        else:
            tag = "unassigned"
        writer.writerow(list(table.raw_rows[item]) + [tag])
    return buffer.getvalue()


# ---------------------------------------------------------------------------
# the session itself


class Session:
    """One dataset, one working layout, one recommendation stream.

    The session serializes its own mutations (the service layer holds a
    lock per session); background searches snapshot state, run pure, and
    publish only if their generation is still the newest.
    """

    def __init__(self, table: DataTable, config: Config | None = None, seed: int | None = None):
        self.table = table
        self.config = config or load_config()
        self.base_seed = self.config.default_seed if seed is None else seed
        self.layout = WorkingLayout(table.n_rows)
        self.feature_spec: FeatureSpec = default_features(table)
        self.desired_k: int | None = None
        self.latest_request = 0
        self.recs: RecommendationSet | None = None
        self._pool: list[ModelResult] = []
        self._matrix: EncodedMatrix | None = None

    # -- feature / matrix plumbing ---------------------------------------

    def set_feature_spec(self, spec: FeatureSpec) -> None:
        self.feature_spec = spec
        self._matrix = None

    def full_matrix(self) -> EncodedMatrix:
        if self._matrix is None:
            self._matrix = apply_features(self.feature_spec, self.table)
        return self._matrix

    def search_matrix(self) -> EncodedMatrix:
        """The full matrix minus deleted rows."""
        full = self.full_matrix()
        if not self.layout.deleted_items:
            return full
        kept = [i for i in range(self.table.n_rows) if i not in self.layout.deleted_items]
        return full.restrict(kept)

    def next_generation(self) -> int:
        self.latest_request += 1
        return self.latest_request

    # -- selection --------------------------------------------------------

    def select_similar(
        self, item_id: int, column: str, intersect_with=None
    ) -> SelectionSet:
        active = None
        if intersect_with is not None:
            active = SelectionSet(frozenset(int(i) for i in intersect_with), "client")
        return similar_by_cell(
            self.table, item_id, column, active, eps_fraction=self.config.eps_fraction
        )

    # -- search entry points ----------------------------------------------

    def run_cluster(
        self,
        features: list[str] | None = None,
        weights: list[float] | None = None,
        desired_k: int | None = None,
        seed: int | None = None,
        top_f: int | None = None,
    ) -> RecommendationSet:
        """The Cluster button: search now and show the best model.

        With demonstrations on screen their derived labels steer the
        ranking; a fresh layout searches unsupervised. The winning model
        replaces the on-screen partition via a load_recommendation op.
        """
        if features is not None:
            if weights is None:
                weights = [1.0] * len(features)
            if len(weights) != len(features):
                raise ValidationError(
                    f"{len(features)} features but {len(weights)} weights"
                )
            for name in features:
                self.table.column(name)
            self.set_feature_spec(user_features(list(zip(features, weights))))
        self.desired_k = desired_k
        truth = self.layout.derive_truth() if self.layout.clusters else None
        if truth is not None and self.feature_spec.mode == "select_k_best":
            self.set_feature_spec(
                select_k_best(self.table, self.feature_spec.k_best or 8, truth)
            )
        generation = self.next_generation()
        recs = self._search(truth, generation, seed=seed, top_f=top_f)
        self._install(recs)
        self._load_result(recs.current_shown)
        return recs

    def rerank(self, generation: int, seed: int | None = None) -> RecommendationSet:
        """Re-search with the current layout as ground truth.

        Does not touch the layout; new recommendations wait in the panel
        until the user applies one.
        """
        truth = self.layout.derive_truth()
        if self.feature_spec.mode == "select_k_best":
            self.set_feature_spec(
                select_k_best(self.table, self.feature_spec.k_best or 8, truth)
            )
        recs = self._search(truth, generation, seed=seed)
        self._install(recs)
        return recs

    def _search(
        self,
        truth: GroundTruthLabels | None,
        generation: int,
        seed: int | None = None,
        top_f: int | None = None,
    ) -> RecommendationSet:
        matrix = self.search_matrix()
        base = self.base_seed if seed is None else seed
        candidates = enumerate_space(
            matrix,
            desired_k=self.desired_k,
            base_seed=base,
            spectral_max_rows=self.config.spectral_max_rows,
        )
        return search(
            matrix,
            candidates,
            truth=truth,
            feature_spec=self.feature_spec,
            f=self.config.top_f if top_f is None else top_f,
            generation=generation,
            desired_k=self.desired_k,
        )

    def _install(self, recs: RecommendationSet) -> None:
        if self.recs is not None and recs.generation < self.recs.generation:
            return
        recs.stale = recs.generation < self.latest_request
        self.recs = recs
        self._pool = [recs.current_shown] + list(recs.ranked)

    def _load_result(self, result: ModelResult) -> None:
        groups = [
            sorted(int(i) for i in members)
            for members in result.assignment.clusters().values()
            if len(members)
        ]
        self.layout.apply(
            "load_recommendation",
            {
                "clusters": groups,
                "algorithm": result.candidate.algorithm,
                "hyperparameters": result.candidate.hyperparameters,
            },
        )

    def apply_recommendation(self, rank: int) -> ModelResult:
        """Swap the model at `rank` (1-based within the panel) onto the screen."""
        if self.recs is None:
            raise UnknownTargetError("no recommendations computed yet")
        if not 1 <= rank <= len(self.recs.ranked):
            raise UnknownTargetError(f"no recommendation at rank {rank}")
        target = self.recs.ranked[rank - 1]
        self._load_result(target)
        others = [r for r in self._pool if r is not target]
        self.recs = RecommendationSet(
            generation=self.recs.generation,
            current_shown=target,
            ranked=others[: len(self._pool) - 1],
            stale=self.recs.stale,
        )
        return target

    # -- demonstration ops -------------------------------------------------

    def apply_op(
        self, kind: str, payload: dict, expected_generation: int | None = None
    ) -> OpOutcome:
        if expected_generation is not None and expected_generation < self.latest_request:
            raise StaleGenerationError(
                f"op built against generation {expected_generation}, "
                f"latest is {self.latest_request}"
            )
        if kind == "set_weights":
            weights = payload.get("weights") or {}
            pairs = [(name, float(w)) for name, w in weights.items()]
            for name, _ in pairs:
                self.table.column(name)
            spec = user_features(pairs)
            outcome = self.layout.apply(kind, payload)
            self.set_feature_spec(spec)
            return outcome
        return self.layout.apply(kind, payload)

    def replay_ops(self, ops: list[DemonstrationOp]) -> None:
        for op in ops:
            self.apply_op(op.kind, op.payload)

    # -- views -------------------------------------------------------------

    def coords(self) -> LayoutCoordinates:
        return layout_coords(self.layout, self.full_matrix())

    def export(self) -> str:
        return export_csv(self.layout, self.table)

    def subcluster(self, cluster_id: int, feature: str, rotate: bool = True):
        """Split one cluster with the next rotation model, plus a histogram."""
        cluster = self.layout.get_cluster(cluster_id)
        self.table.column(feature)
        if len(cluster.members) < 4:
            raise TooSmallClusterError(
                f"cluster {cluster_id} has {len(cluster.members)} items; need 4"
            )
        members = np.array(sorted(cluster.members), dtype=int)
        if rotate or cluster.subpanel is None:
            cluster.subpanel = run_subcluster(
                self.full_matrix(), members, previous=cluster.subpanel, seed=self.base_seed
            )
        cluster.subpanel_feature = feature
        hist = feature_histogram(self.table, feature, members)
        return cluster.subpanel, hist

    def table_page(self, offset: int = 0, limit: int = 50) -> dict:
        if offset < 0 or limit < 1:
            raise ValidationError("offset must be >= 0 and limit >= 1")
        stop = min(self.table.n_rows, offset + limit)
        rows = [
            {"item_id": i, "values": self.table.row_record(i)} for i in range(offset, stop)
        ]
        return {"rows": rows, "total": self.table.n_rows, "offset": offset, "limit": limit}
