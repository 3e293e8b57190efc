"""Request and response bodies for the HTTP API."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel


class ColumnInfo(BaseModel):
    name: str
    kind: str
    missing_count: int
    minimum: Optional[float] = None
    maximum: Optional[float] = None
    categories: Optional[list[str]] = None


class SessionCreated(BaseModel):
    session_id: str
    n_rows: int
    columns: list[ColumnInfo]


class TableRowOut(BaseModel):
    item_id: int
    values: dict[str, str]


class TablePageOut(BaseModel):
    rows: list[TableRowOut]
    total: int
    offset: int
    limit: int


class SimilarRequest(BaseModel):
    item_id: int
    column: str
    intersect_with: Optional[list[int]] = None


class SelectionOut(BaseModel):
    item_ids: list[int]
    provenance: str


class ClusterRequest(BaseModel):
    features: Optional[list[str]] = None
    weights: Optional[list[float]] = None
    desired_k: Optional[int] = None
    seed: Optional[int] = None
    top_f: Optional[int] = None


class OpBody(BaseModel):
    kind: str
    payload: dict


class OpRequest(BaseModel):
    op: OpBody
    expected_generation: Optional[int] = None
    rerank: bool = True


class ClusterOut(BaseModel):
    cluster_id: int
    color_tag: int
    origin: str
    members: list[int]


class LayoutOut(BaseModel):
    clusters: list[ClusterOut]
    deleted_items: list[int]
    unassigned_items: list[int]
    n_rows: int


class PointOut(BaseModel):
    item_id: int
    cluster_id: int
    x: float
    y: float


class AnchorOut(BaseModel):
    cluster_id: int
    x: float
    y: float
    radius: float


class CoordsOut(BaseModel):
    points: list[PointOut]
    anchors: list[AnchorOut]


class CandidateOut(BaseModel):
    algorithm: str
    hyperparameters: dict
    seed: int


class MetricsOut(BaseModel):
    silhouette: Optional[float] = None
    davies_bouldin: Optional[float] = None
    homogeneity: Optional[float] = None
    adjusted_rand: Optional[float] = None
    fowlkes_mallows: Optional[float] = None
    nmi: Optional[float] = None
    score: float


class DescriptionOut(BaseModel):
    n_clusters: int
    top_features: list[str]
    cluster_sizes: list[int]
    sentence: str


class ResultOut(BaseModel):
    rank: int
    candidate: CandidateOut
    metrics: MetricsOut
    description: DescriptionOut
    mismatch: bool
    clusters: list[list[int]]
    noise: list[int]


class RecommendationsOut(BaseModel):
    generation: int
    stale: bool
    mismatch: bool
    current_shown: ResultOut
    ranked: list[ResultOut]


class PendingOut(BaseModel):
    status: str
    latest_request: int


class OpResponse(BaseModel):
    generation: int
    noop: bool
    cluster_id: Optional[int] = None
    scheduled_generation: Optional[int] = None
    layout: LayoutOut
    coords: Optional[CoordsOut] = None


class ClusterResponse(BaseModel):
    generation: int
    layout: LayoutOut
    coords: CoordsOut


class ApplyResponse(BaseModel):
    generation: int
    rank: int
    layout: LayoutOut
    coords: CoordsOut


class SubclusterRequest(BaseModel):
    feature: str
    rotate: bool = True


class HistogramOut(BaseModel):
    feature: str
    kind: str
    counts: list[int]
    bin_edges: Optional[list[float]] = None
    categories: Optional[list[str]] = None


class SubclusterOut(BaseModel):
    parent_cluster: int
    algorithm: str
    hyperparameters: dict
    refresh_count: int
    groups: list[list[int]]
    noise: list[int]
    histogram: HistogramOut


class OpLogEntry(BaseModel):
    kind: str
    payload: dict
    timestamp: float


class OpLogOut(BaseModel):
    ops: list[OpLogEntry]
