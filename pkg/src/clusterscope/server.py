"""HTTP/JSON session service exposing the engine to the UI and CLI.

Sessions are in-memory; each holds one immutable table plus the current
view (filter + feature subset) and optionally fitted projection/clustering
models. Every view mutation bumps the session revision; fitted models
remember the revision they were fitted at, and requests that would mix a
stale model with a newer view are answered 409 instead of silently mixing.
"""

from __future__ import annotations

import math
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import stats as statsmod
from .boxqp import ConstraintSet
from .clusters import (
    ClusteringModel,
    ClusterProfile,
    agglomerative,
    cluster_profile,
    kmeans,
)
from .errors import EngineError, ParameterError, UnknownFeatureError, ValidationError
from .filterlang import parse as parse_filter
from .projection import Embedding, ProjectionModel, fit_cmds, fit_pca_embedding, pairwise_distances
from .table import DataTable, TableView, apply_filter, export_csv, keyword_filter, load_csv
from .whatif import backward_project_constrained, forward_project, proline_all


class ApiConflict(Exception):
    """Mapped to HTTP 409: a fitted model is missing or stale for the view."""

    def __init__(self, reason: str, **extra: Any):
        super().__init__(reason)
        self.body = {"reason": reason, **extra}


class UnknownSession(Exception):
    pass


@dataclass
class FittedProjection:
    model: ProjectionModel
    embedding: Embedding
    revision: int


@dataclass
class FittedClustering:
    model: ClusteringModel
    profile: ClusterProfile
    revision: int


@dataclass
class Session:
    id: str
    table: DataTable
    view: TableView
    revision: int = 0
    projection: Optional[FittedProjection] = None
    clustering: Optional[FittedClustering] = None
    lock: threading.Lock = field(default_factory=threading.Lock)
    cancel_event: threading.Event = field(default_factory=threading.Event)


class SessionStore:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, table: DataTable) -> Session:
        session = Session(id=uuid.uuid4().hex, table=table, view=table.default_view())
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSession(session_id)
        return session

    def delete(self, session_id: str) -> None:
        with self._lock:
            session = self._sessions.pop(session_id, None)
        if session is None:
            raise UnknownSession(session_id)
        session.cancel_event.set()


class FilterBody(BaseModel):
    expr: Optional[str] = None
    keyword: Optional[str] = None


class FeaturesBody(BaseModel):
    names: list[str]


class ClusteringBody(BaseModel):
    method: str
    k: int
    distance: str = "euclidean"
    linkage: Optional[str] = None
    seed: int = 0


class ProjectionBody(BaseModel):
    method: str
    distance: str = "euclidean"
    standardize: bool = False


PointSpec = Union[str, dict[str, float]]


class ForwardBody(BaseModel):
    point: PointSpec
    delta: dict[str, float]


class ProlinesBody(BaseModel):
    point: PointSpec
    k: float = 2.0
    c: float = 0.25
    features: Optional[list[str]] = None


class BackwardBody(BaseModel):
    point: PointSpec
    delta_y: tuple[float, float]
    constraints: Optional[dict] = None
    lambda_reg: float = 1e-6


class AnovaBody(BaseModel):
    feature: str
    cluster_ids: list[int]


def _json_safe(x: float) -> Optional[float]:
    return None if (math.isnan(x) or math.isinf(x)) else x


def _resolve_point(session: Session, spec: PointSpec) -> np.ndarray:
    """A point in the fitted projection's feature space, from id or mapping."""
    assert session.projection is not None
    names = session.projection.model.fitted_feature_names
    table = session.table
    if isinstance(spec, str):
        if spec not in table.row_ids:
            raise UnknownFeatureError([spec])
        i = table.row_ids.index(spec)
        return np.array([table.values[i, table.column_index(n)] for n in names])
    missing = [n for n in names if n not in spec]
    if missing:
        raise ValidationError(f"point is missing fitted features: {', '.join(missing)}")
    return np.array([float(spec[n]) for n in names])


def _require_projection(session: Session) -> FittedProjection:
    if session.projection is None:
        raise ApiConflict("no_projection", hint="POST /sessions/{id}/projection first")
    if session.projection.revision != session.revision:
        raise ApiConflict(
            "stale_model",
            model="projection",
            fitted_revision=session.projection.revision,
            revision=session.revision,
            hint="recompute the projection for the current view",
        )
    if not session.projection.model.is_linear:
        raise ApiConflict(
            "no_linear_projection",
            hint="forward/backward interactions need a PCA projection",
        )
    return session.projection


def _require_clustering(session: Session) -> FittedClustering:
    if session.clustering is None:
        raise ApiConflict("no_clustering", hint="POST /sessions/{id}/clustering first")
    if session.clustering.revision != session.revision:
        raise ApiConflict(
            "stale_model",
            model="clustering",
            fitted_revision=session.clustering.revision,
            revision=session.revision,
            hint="recompute the clustering for the current view",
        )
    return session.clustering


def _view_sigmas(view: TableView) -> np.ndarray:
    return view.matrix().std(axis=0)


def create_app(data_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="clusterscope", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore()
    app.state.sessions = store
    base_dir = Path(data_dir) if data_dir else None

    @app.exception_handler(EngineError)
    async def engine_error_handler(_: Request, exc: EngineError):
        return JSONResponse(status_code=422, content=exc.payload())

    @app.exception_handler(ApiConflict)
    async def conflict_handler(_: Request, exc: ApiConflict):
        return JSONResponse(status_code=409, content=exc.body)

    @app.exception_handler(UnknownSession)
    async def unknown_session_handler(_: Request, exc: UnknownSession):
        return JSONResponse(
            status_code=404, content={"reason": "unknown_session", "id": str(exc)}
        )

    @app.post("/sessions")
    async def create_session(request: Request):
        content_type = request.headers.get("content-type", "")
        delimiter = request.query_params.get("delimiter", ",")
        header_row = request.query_params.get("header", "true").lower() != "false"
        id_column = request.query_params.get("id_column")
        if content_type.startswith("application/json"):
            body = await request.json()
            if "path" in body:
                if base_dir is None:
                    raise ValidationError("server started without a data directory")
                path = (base_dir / body["path"]).resolve()
                if not str(path).startswith(str(base_dir.resolve())):
                    raise ValidationError("path escapes the data directory")
                raw = path.read_bytes()
            elif "csv" in body:
                raw = body["csv"].encode("utf-8")
            else:
                raise ValidationError("body must carry 'path' or 'csv'")
        else:
            raw = await request.body()
        table = load_csv(raw, delimiter=delimiter, header_row=header_row, id_column=id_column)
        session = store.create(table)
        return {"session_id": session.id, "table": table.to_metadata_json()}

    @app.delete("/sessions/{session_id}")
    def delete_session(session_id: str):
        store.delete(session_id)
        return {"deleted": session_id}

    @app.get("/sessions/{session_id}/table")
    def table_page(
        session_id: str,
        offset: int = 0,
        limit: int = 50,
        sort_by: Optional[str] = None,
        dir: str = "asc",
    ):
        session = store.get(session_id)
        with session.lock:
            table = session.table
            view = session.view
            indices = list(view.row_indices)
            if sort_by is not None:
                if sort_by == table.id_name:
                    key = lambda i: table.row_ids[i]
                elif sort_by in table.categorical:
                    key = lambda i: table.categorical[sort_by][i]
                elif sort_by in table.numeric_feature_names:
                    col = table.column_index(sort_by)
                    key = lambda i: table.values[i, col]
                else:
                    raise UnknownFeatureError([sort_by])
                indices.sort(key=key, reverse=(dir == "desc"))
            total = len(indices)
            page = indices[offset : offset + limit]

            labels: Optional[dict[int, int]] = None
            clustering = session.clustering
            if clustering is not None and clustering.revision == session.revision:
                labels = {
                    int(row): int(lab)
                    for row, lab in zip(view.row_indices, clustering.model.labels)
                }
            rows = []
            for i in page:
                features: dict[str, Any] = {
                    n: table.values[i, table.column_index(n)]
                    for n in view.feature_subset
                }
                for name, col in table.categorical.items():
                    features[name] = col[i]
                rows.append(
                    {
                        "id": table.row_ids[i],
                        "features": features,
                        "label": labels.get(int(i)) if labels is not None else None,
                    }
                )
            return {"revision": session.revision, "total": total, "offset": offset, "rows": rows}

    @app.put("/sessions/{session_id}/filter")
    def set_filter(session_id: str, body: FilterBody):
        session = store.get(session_id)
        with session.lock:
            table = session.table
            mask = np.ones(table.n_rows, dtype=bool)
            if body.expr:
                mask &= apply_filter(table, parse_filter(body.expr))
            if body.keyword:
                mask &= keyword_filter(table, body.keyword)
            session.view = session.view.with_row_mask(mask)
            session.revision += 1
            return {"revision": session.revision, "match_count": int(mask.sum())}

    @app.put("/sessions/{session_id}/features")
    def set_features(session_id: str, body: FeaturesBody):
        session = store.get(session_id)
        with session.lock:
            numeric = session.table.numeric_feature_names
            unknown = [n for n in body.names if n not in numeric]
            if unknown:
                raise UnknownFeatureError(unknown)
            if not body.names:
                raise ValidationError("at least one feature must stay selected")
            session.view = session.view.with_features(body.names)
            session.revision += 1
            return {"revision": session.revision, "features": list(body.names)}

    @app.post("/sessions/{session_id}/clustering")
    def fit_clustering(session_id: str, body: ClusteringBody):
        session = store.get(session_id)
        with session.lock:
            view = session.view
            X = view.matrix()
            cancel = session.cancel_event.is_set
            if body.method == "kmeans":
                model = kmeans(
                    X, body.k, distance=body.distance, seed=body.seed, cancel=cancel
                )
            elif body.method in ("agglomerative", "agglo"):
                model = agglomerative(
                    X,
                    body.k,
                    distance=body.distance,
                    linkage=body.linkage or "average",
                    cancel=cancel,
                )
            else:
                raise ParameterError(f"unknown clustering method {body.method!r}")
            profile = cluster_profile(model, view)
            session.clustering = FittedClustering(model, profile, session.revision)
            return {
                "revision": session.revision,
                "model": model.to_json_dict(),
                "profile": profile.to_json_dict(),
            }

    @app.post("/sessions/{session_id}/projection")
    def fit_projection(session_id: str, body: ProjectionBody):
        session = store.get(session_id)
        with session.lock:
            view = session.view
            X = view.matrix()
            names = tuple(view.feature_subset)
            if body.method == "pca":
                if body.distance != "euclidean":
                    raise ParameterError(
                        "PCA projections are euclidean-only; use cmds for other measures"
                    )
                embedding = fit_pca_embedding(X, names, standardize=body.standardize)
            elif body.method == "cmds":
                embedding = fit_cmds(pairwise_distances(X, body.distance), names)
            else:
                raise ParameterError(f"unknown projection method {body.method!r}")
            session.projection = FittedProjection(
                embedding.model, embedding, session.revision
            )
            labels = None
            clustering = session.clustering
            if clustering is not None and clustering.revision == session.revision:
                labels = clustering.model.labels.tolist()
            return {
                "revision": session.revision,
                "coords": embedding.coords.tolist(),
                "row_ids": view.selected_row_ids(),
                "labels": labels,
                "model": embedding.model.to_json_dict(),
                "negative_eigenvalues_clamped": embedding.negative_eigenvalues_clamped,
            }

    @app.post("/sessions/{session_id}/forward")
    def forward(session_id: str, body: ForwardBody):
        session = store.get(session_id)
        with session.lock:
            fitted = _require_projection(session)
            model = fitted.model
            point = _resolve_point(session, body.point)
            unknown = [n for n in body.delta if n not in model.fitted_feature_names]
            if unknown:
                raise UnknownFeatureError(unknown)
            delta_x = np.array(
                [body.delta.get(n, 0.0) for n in model.fitted_feature_names]
            )
            y = model.project(point)
            delta_y = forward_project(model, delta_x)
            return {
                "revision": session.revision,
                "y": y.tolist(),
                "delta_y": delta_y.tolist(),
                "new_y": (y + delta_y).tolist(),
            }

    @app.post("/sessions/{session_id}/prolines")
    def prolines(session_id: str, body: ProlinesBody):
        session = store.get(session_id)
        with session.lock:
            fitted = _require_projection(session)
            model = fitted.model
            point = _resolve_point(session, body.point)
            sigmas = _view_sigmas(session.view)
            indices = None
            if body.features is not None:
                names = list(model.fitted_feature_names)
                unknown = [n for n in body.features if n not in names]
                if unknown:
                    raise UnknownFeatureError(unknown)
                indices = [names.index(n) for n in body.features]
            lines = proline_all(
                model, point, sigmas, k=body.k, c=body.c, feature_indices=indices
            )
            return {
                "revision": session.revision,
                "prolines": [pl.to_json_dict() for pl in lines],
            }

    @app.post("/sessions/{session_id}/backward")
    def backward(session_id: str, body: BackwardBody):
        session = store.get(session_id)
        with session.lock:
            fitted = _require_projection(session)
            model = fitted.model
            point = _resolve_point(session, body.point)
            names = list(model.fitted_feature_names)
            cons = (
                ConstraintSet.from_json_dict(body.constraints, names)
                if body.constraints
                else None
            )
            solution = backward_project_constrained(
                model, np.asarray(body.delta_y), cons or ConstraintSet.empty(len(names)),
                lambda_reg=body.lambda_reg,
            )
            delta = solution.delta_x
            return {
                "revision": session.revision,
                "status": solution.status,
                "objective": _json_safe(solution.objective),
                "kkt_residual": _json_safe(solution.kkt_residual),
                "delta_x": {n: float(delta[i]) for i, n in enumerate(names)},
                "new_point": {n: float(point[i] + delta[i]) for i, n in enumerate(names)},
                "active_lower": list(solution.active_lower),
                "active_upper": list(solution.active_upper),
            }

    @app.post("/sessions/{session_id}/stats/anova")
    def stats_anova(session_id: str, body: AnovaBody):
        session = store.get(session_id)
        with session.lock:
            fitted = _require_clustering(session)
            table = session.table
            col = table.column_index(body.feature)
            rows = session.view.row_indices
            groups = []
            for cid in body.cluster_ids:
                members = rows[fitted.model.labels == cid]
                groups.append(table.values[members, col])
            result = statsmod.anova_oneway(groups)
            return {"revision": session.revision, **result.to_json_dict()}

    @app.get("/sessions/{session_id}/stats/correlations")
    def stats_correlations(session_id: str):
        session = store.get(session_id)
        with session.lock:
            entries = statsmod.corr_pairs(session.view)
            return {
                "revision": session.revision,
                "correlations": [e.to_json_dict() for e in entries],
            }

    @app.get("/sessions/{session_id}/stats/points")
    def stats_points(session_id: str):
        session = store.get(session_id)
        with session.lock:
            return {
                "revision": session.revision,
                "features": statsmod.point_stats(session.view),
            }

    @app.get("/sessions/{session_id}/export.csv")
    def export(session_id: str):
        session = store.get(session_id)
        with session.lock:
            payload = export_csv(session.view)
        return Response(content=payload, media_type="text/csv")

    return app


def run(host: str = "127.0.0.1", port: int = 8000, data_dir: str | None = None):
    import uvicorn

    uvicorn.run(create_app(data_dir), host=host, port=port)
