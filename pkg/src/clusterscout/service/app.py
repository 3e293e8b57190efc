"""FastAPI application exposing the engine to the UI and the CLI.

Mutating endpoints take an optional Idempotency-Key header; a repeated
key replays the stored response instead of re-applying the op. Search
work triggered by demonstration ops runs as a background task and is
picked up by polling GET /recommendations with the scheduled
generation.
"""

from __future__ import annotations

import logging
import math

from fastapi import BackgroundTasks, FastAPI, File, Header, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response

from ..config import Config, load_config
from ..errors import (
    EmptyFeatureError,
    EngineError,
    InfeasibleError,
    NumericFailureError,
    StaleGenerationError,
    UnknownTargetError,
    ValidationError,
)
from ..search import ModelResult, RecommendationSet
from ..session import Session
from ..tabular import ingest_csv
from . import schemas
from .store import SessionHandle, SessionStore

log = logging.getLogger(__name__)


def _status_of(exc: EngineError) -> int:
    if isinstance(exc, UnknownTargetError):
        return 404
    if isinstance(exc, StaleGenerationError):
        return 409
    if isinstance(exc, EmptyFeatureError):
        # Deselecting every feature leaves nothing to cluster on; that is an
        # infeasible request, not a malformed one.
        return 422
    if isinstance(exc, ValidationError):
        return 400
    if isinstance(exc, InfeasibleError):
        return 422
    return 500


def _json_float(value):
    if value is None or not math.isfinite(value):
        return None
    return float(value)


def _layout_out(session: Session) -> schemas.LayoutOut:
    layout = session.layout
    return schemas.LayoutOut(
        clusters=[
            schemas.ClusterOut(
                cluster_id=c.cluster_id,
                color_tag=c.color_tag,
                origin=c.origin,
                members=sorted(int(i) for i in c.members),
            )
            for c in layout.clusters
        ],
        deleted_items=sorted(int(i) for i in layout.deleted_items),
        unassigned_items=sorted(int(i) for i in layout.unassigned_items()),
        n_rows=layout.n_rows,
    )


def _coords_out(session: Session) -> schemas.CoordsOut | None:
    if not session.layout.clusters:
        return None
    coords = session.coords()
    return schemas.CoordsOut(
        points=[
            schemas.PointOut(item_id=p.item_id, cluster_id=p.cluster_id, x=p.x, y=p.y)
            for p in coords.points
        ],
        anchors=[
            schemas.AnchorOut(cluster_id=a.cluster_id, x=a.x, y=a.y, radius=a.radius)
            for a in coords.anchors
        ],
    )


def _result_out(result: ModelResult, rank: int) -> schemas.ResultOut:
    assignment = result.assignment
    groups = [
        sorted(int(i) for i in members) for members in assignment.clusters().values()
    ]
    bundle = result.metrics
    return schemas.ResultOut(
        rank=rank,
        candidate=schemas.CandidateOut(
            algorithm=result.candidate.algorithm,
            hyperparameters=result.candidate.hyperparameters,
            seed=result.candidate.seed,
        ),
        metrics=schemas.MetricsOut(
            silhouette=_json_float(bundle.silhouette),
            davies_bouldin=_json_float(bundle.davies_bouldin),
            homogeneity=_json_float(bundle.homogeneity),
            adjusted_rand=_json_float(bundle.adjusted_rand),
            fowlkes_mallows=_json_float(bundle.fowlkes_mallows),
            nmi=_json_float(bundle.nmi),
            score=float(bundle.score),
        ),
        description=schemas.DescriptionOut(
            n_clusters=result.description.n_clusters,
            top_features=result.description.top_features,
            cluster_sizes=result.description.cluster_sizes,
            sentence=result.description.sentence,
        ),
        mismatch=result.mismatch,
        clusters=groups,
        noise=sorted(int(i) for i in assignment.noise_items()),
    )


def _recs_out(recs: RecommendationSet) -> schemas.RecommendationsOut:
    return schemas.RecommendationsOut(
        generation=recs.generation,
        stale=recs.stale,
        mismatch=recs.mismatch,
        current_shown=_result_out(recs.current_shown, 0),
        ranked=[_result_out(r, i + 1) for i, r in enumerate(recs.ranked)],
    )


def create_app(config: Config | None = None) -> FastAPI:
    config = config or load_config()
    store = SessionStore()
    app = FastAPI(title="clusterscout")
    app.state.config = config
    app.state.store = store

    @app.exception_handler(EngineError)
    async def engine_error(request: Request, exc: EngineError):
        body = {"error": type(exc).__name__, "detail": str(exc)}
        if isinstance(exc, NumericFailureError) and exc.residual is not None:
            body["residual"] = exc.residual
        return JSONResponse(status_code=_status_of(exc), content=body)

    @app.exception_handler(RequestValidationError)
    async def request_invalid(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": "RequestValidationError", "detail": str(exc)},
        )

    def _replay_or_run(handle: SessionHandle, signature: str, key: str | None, build):
        """Run build() once per idempotency key, replaying the stored response."""
        if key:
            cached = handle.replay_cache.get((signature, key))
            if cached is not None:
                return JSONResponse(status_code=cached[0], content=cached[1])
        status, model = build()
        body = model.model_dump()
        if key:
            handle.replay_cache[(signature, key)] = (status, body)
        return JSONResponse(status_code=status, content=body)

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201, response_model=schemas.SessionCreated)
    async def create_session(file: UploadFile = File(...)):
        content = await file.read()
        if len(content) > config.max_upload_bytes:
            raise ValidationError(
                f"upload of {len(content)} bytes exceeds limit {config.max_upload_bytes}"
            )
        table = ingest_csv(content, table_id=file.filename or "upload")
        session = Session(table, config=config)
        handle = store.create(session)
        columns = [
            schemas.ColumnInfo(
                name=spec.name,
                kind=spec.kind,
                missing_count=spec.missing_count,
                minimum=spec.numeric_stats.minimum if spec.numeric_stats else None,
                maximum=spec.numeric_stats.maximum if spec.numeric_stats else None,
                categories=list(spec.categories) if spec.categories else None,
            )
            for spec in table.columns
        ]
        return schemas.SessionCreated(
            session_id=handle.session_id, n_rows=table.n_rows, columns=columns
        )

    @app.get("/sessions/{sid}/table", response_model=schemas.TablePageOut)
    def table_page(sid: str, offset: int = 0, limit: int = 50):
        handle = store.get(sid)
        with handle.lock:
            return handle.session.table_page(offset, limit)

    @app.post("/sessions/{sid}/select/similar", response_model=schemas.SelectionOut)
    def select_similar(sid: str, body: schemas.SimilarRequest):
        handle = store.get(sid)
        with handle.lock:
            selection = handle.session.select_similar(
                body.item_id, body.column, body.intersect_with
            )
        return schemas.SelectionOut(
            item_ids=selection.sorted_ids(), provenance=selection.provenance
        )

    @app.post("/sessions/{sid}/cluster")
    def run_cluster(
        sid: str,
        body: schemas.ClusterRequest,
        idempotency_key: str | None = Header(default=None, alias="Idempotency-Key"),
    ):
        handle = store.get(sid)
        with handle.lock:

            def build():
                recs = handle.session.run_cluster(
                    features=body.features,
                    weights=body.weights,
                    desired_k=body.desired_k,
                    seed=body.seed,
                    top_f=body.top_f,
                )
                return 200, schemas.ClusterResponse(
                    generation=recs.generation,
                    layout=_layout_out(handle.session),
                    coords=_coords_out(handle.session),
                )

            return _replay_or_run(handle, "POST cluster", idempotency_key, build)

    @app.post("/sessions/{sid}/ops")
    def submit_op(
        sid: str,
        body: schemas.OpRequest,
        background: BackgroundTasks,
        idempotency_key: str | None = Header(default=None, alias="Idempotency-Key"),
    ):
        handle = store.get(sid)
        with handle.lock:
            scheduled: list[int | None] = [None]

            def build():
                outcome = handle.session.apply_op(
                    body.op.kind, body.op.payload, body.expected_generation
                )
                if body.rerank and handle.session.layout.clusters and not outcome.noop:
                    scheduled[0] = handle.session.next_generation()
                return 200, schemas.OpResponse(
                    generation=handle.session.latest_request,
                    noop=outcome.noop,
                    cluster_id=outcome.cluster_id,
                    scheduled_generation=scheduled[0],
                    layout=_layout_out(handle.session),
                    coords=_coords_out(handle.session),
                )

            response = _replay_or_run(handle, "POST ops", idempotency_key, build)
        if scheduled[0] is not None:
            background.add_task(_run_rerank, handle, scheduled[0])
        return response

    @app.get("/sessions/{sid}/ops", response_model=schemas.OpLogOut)
    def op_log(sid: str):
        handle = store.get(sid)
        with handle.lock:
            ops = [
                schemas.OpLogEntry(kind=op.kind, payload=op.payload, timestamp=op.timestamp)
                for op in handle.session.layout.history
            ]
        return schemas.OpLogOut(ops=ops)

    @app.get("/sessions/{sid}/recommendations")
    def recommendations(sid: str, generation: int = 0):
        handle = store.get(sid)
        with handle.lock:
            recs = handle.session.recs
            if recs is None or recs.generation < generation:
                return JSONResponse(
                    status_code=202,
                    content=schemas.PendingOut(
                        status="pending", latest_request=handle.session.latest_request
                    ).model_dump(),
                )
            return JSONResponse(status_code=200, content=_recs_out(recs).model_dump())

    @app.post("/sessions/{sid}/recommendations/{rank}/apply")
    def apply_recommendation(
        sid: str,
        rank: int,
        idempotency_key: str | None = Header(default=None, alias="Idempotency-Key"),
    ):
        handle = store.get(sid)
        with handle.lock:

            def build():
                handle.session.apply_recommendation(rank)
                return 200, schemas.ApplyResponse(
                    generation=handle.session.recs.generation,
                    rank=rank,
                    layout=_layout_out(handle.session),
                    coords=_coords_out(handle.session),
                )

            return _replay_or_run(handle, f"POST apply {rank}", idempotency_key, build)

    @app.post("/sessions/{sid}/clusters/{cid}/subcluster")
    def subcluster(
        sid: str,
        cid: int,
        body: schemas.SubclusterRequest,
        idempotency_key: str | None = Header(default=None, alias="Idempotency-Key"),
    ):
        handle = store.get(sid)
        with handle.lock:

            def build():
                model, hist = handle.session.subcluster(cid, body.feature, body.rotate)
                groups = [
                    sorted(int(i) for i in members)
                    for members in model.assignment.clusters().values()
                ]
                return 200, schemas.SubclusterOut(
                    parent_cluster=cid,
                    algorithm=model.candidate.algorithm,
                    hyperparameters=model.candidate.hyperparameters,
                    refresh_count=model.refresh_count,
                    groups=groups,
                    noise=sorted(int(i) for i in model.assignment.noise_items()),
                    histogram=schemas.HistogramOut(
                        feature=hist.feature,
                        kind=hist.kind,
                        counts=hist.counts,
                        bin_edges=hist.bin_edges,
                        categories=hist.categories,
                    ),
                )

            return _replay_or_run(handle, f"POST subcluster {cid}", idempotency_key, build)

    @app.get("/sessions/{sid}/export.csv")
    def export(sid: str):
        handle = store.get(sid)
        with handle.lock:
            document = handle.session.export()
        return Response(
            content=document,
            media_type="text/csv",
            headers={"Content-Disposition": "attachment; filename=clusters.csv"},
        )

    return app


def _run_rerank(handle: SessionHandle, generation: int) -> None:
    with handle.lock:
        if generation < handle.session.latest_request:
            return  # a newer request superseded this one before it started
        try:
            handle.session.rerank(generation)
        except EngineError as exc:
            log.warning("background search %d failed: %s", generation, exc)


app = create_app()
