"""HTTP facade over the extraction pipeline, used by the web UI.

Sessions are in-memory: each holds uploaded recordings and the scenarios
produced by searches, and expires after an idle period.  All endpoints
are deterministic given session state and request (offline provider).
"""
from __future__ import annotations

import itertools
import time
import uuid
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, File, Form, HTTPException, Query, UploadFile
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from . import criticality, evaluation, exporters, schema, search, understanding
from .criticality import CriticalityConfig, CriticalityReport, MetricKind, MetricParams
from .errors import ProviderError, ScenarioMinerError
from .search import ScenarioMatch, SearchParams
from .activities import DetectionParams
from .trajectory_store import RecordingConfig, TrajectoryStore, parse_tracks_csv

DEFAULT_SESSION_TTL = 3600.0


@dataclass
class StoredScenario:
    scenario_id: str
    recording_id: str
    match: ScenarioMatch
    reports: tuple[CriticalityReport, ...]
    passes: bool
    metric: Optional[str]


@dataclass
class Session:
    session_id: str
    created_at: float = field(default_factory=time.time)
    last_access: float = field(default_factory=time.time)
    recordings: dict[str, TrajectoryStore] = field(default_factory=dict)
    scenarios: dict[str, StoredScenario] = field(default_factory=dict)
    _counter: itertools.count = field(default_factory=lambda: itertools.count(1))

    def next_scenario_id(self) -> str:
        return f"scn-{next(self._counter):04d}"


class SessionStore:
    def __init__(self, ttl: float = DEFAULT_SESSION_TTL):
        self.ttl = ttl
        self._sessions: dict[str, Session] = {}

    def _purge(self) -> None:
        now = time.time()
        expired = [
            sid for sid, s in self._sessions.items()
            if now - s.last_access > self.ttl
        ]
        for sid in expired:
            del self._sessions[sid]

    def acquire(self, session_id: Optional[str]) -> Session:
        self._purge()
        if session_id is None:
            session_id = "default"
        session = self._sessions.get(session_id)
        if session is None:
            session = Session(session_id=session_id)
            self._sessions[session_id] = session
        session.last_access = time.time()
        return session

    def get(self, session_id: Optional[str]) -> Session:
        self._purge()
        session = self._sessions.get(session_id or "default")
        if session is None:
            raise HTTPException(404, detail="unknown session")
        session.last_access = time.time()
        return session


class InterpretRequest(BaseModel):
    description: str
    provider: str = "offline"
    provider_config: Optional[dict] = None


class SearchRequest(BaseModel):
    recording_id: str
    query: dict
    search_params: Optional[dict] = None
    criticality_config: Optional[dict] = None


def _report_json(report: CriticalityReport) -> dict:
    return {
        "kind": report.kind.value,
        "series": list(report.series),
        "aggregate": report.aggregate,
        "threshold": report.threshold,
        "comparison": report.comparison,
        "passes_threshold": report.passes_threshold,
    }


def _search_params_from_json(obj: Optional[dict]) -> SearchParams:
    obj = obj or {}
    det = obj.get("detection", {})
    return SearchParams(
        detection=DetectionParams(
            a_lon_threshold=det.get("a_lon_threshold", 0.2),
            min_activity_duration=det.get("min_activity_duration", 1.0),
            lane_change_half_window=det.get("lane_change_half_window", 2.0),
        ),
        end_position_grace=obj.get("end_position_grace", 2.0),
        min_window_duration=obj.get("min_window_duration", 1.0),
    )


def _criticality_from_json(obj: dict) -> tuple[CriticalityConfig, MetricParams]:
    try:
        kind = MetricKind(obj["kind"])
    except (KeyError, ValueError):
        raise HTTPException(400, detail=f"unknown metric kind: {obj.get('kind')!r}")
    config = CriticalityConfig(
        kind=kind,
        threshold=float(obj["threshold"]),
        comparison=obj.get("comparison"),
    )
    p = obj.get("params", {})
    params = MetricParams(
        ttc_tau=p.get("ttc_tau", 3.0),
        safety_time_ts=p.get("safety_time_ts", 1.0),
        max_deceleration=p.get("max_deceleration", 7.5),
    )
    return config, params


def create_app(session_ttl: float = DEFAULT_SESSION_TTL) -> FastAPI:
    app = FastAPI(title="scenario-miner")
    sessions = SessionStore(ttl=session_ttl)
    app.state.sessions = sessions

    @app.exception_handler(ScenarioMinerError)
    async def _domain_error(request, exc: ScenarioMinerError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.post("/api/recordings")
    async def upload_recording(
        file: UploadFile = File(...),
        frame_rate: float = Form(25.0),
        recording_id: Optional[str] = Form(None),
        session_id: Optional[str] = Query(None),
    ):
        session = sessions.acquire(session_id)
        rid = recording_id or (file.filename or f"recording-{uuid.uuid4().hex[:8]}")
        config = RecordingConfig(frame_rate=frame_rate, recording_id=rid)
        data = await file.read()
        try:
            store = parse_tracks_csv(data, config)
        except ScenarioMinerError as exc:
            raise HTTPException(400, detail=str(exc))
        if len(store) == 0:
            raise HTTPException(400, detail="no data rows")
        session.recordings[rid] = store
        return {
            "session_id": session.session_id,
            "recording_id": rid,
            "track_count": len(store),
            "frame_range": list(store.frame_range),
        }

    @app.post("/api/interpret")
    async def interpret(body: InterpretRequest, session_id: Optional[str] = Query(None)):
        sessions.acquire(session_id)
        if not body.description.strip():
            raise HTTPException(400, detail="description must be non-empty")
        if body.provider == "offline":
            query = understanding.interpret_offline(body.description)
        elif body.provider == "remote":
            cfg = body.provider_config or {}
            provider = understanding.ProviderConfig(
                endpoint=cfg.get("endpoint", understanding.ProviderConfig.endpoint),
                model=cfg.get("model", understanding.ProviderConfig.model),
                api_key=cfg.get("api_key", ""),
                timeout=cfg.get("timeout", 60.0),
                max_retries=cfg.get("max_retries", 2),
            )
            try:
                query = understanding.interpret_remote(body.description, provider)
            except ProviderError as exc:
                return JSONResponse(
                    status_code=502,
                    content={
                        "detail": str(exc),
                        "raw_response": exc.last_response,
                    },
                )
        else:
            raise HTTPException(400, detail=f"unknown provider: {body.provider!r}")
        return schema.query_to_json(query)

    @app.post("/api/search")
    async def run_search(body: SearchRequest, session_id: Optional[str] = Query(None)):
        session = sessions.acquire(session_id)
        store = session.recordings.get(body.recording_id)
        if store is None:
            raise HTTPException(404, detail=f"unknown recording: {body.recording_id!r}")
        query = schema.query_from_json(body.query)
        violations = schema.validate_query(query)
        if violations:
            raise HTTPException(400, detail="; ".join(violations))
        params = _search_params_from_json(body.search_params)
        matches, near_misses = search.search_with_explanations(store, query, params)

        config = metric_params = None
        if body.criticality_config:
            config, metric_params = _criticality_from_json(body.criticality_config)

        pool = []
        for match in matches:
            reports: tuple[CriticalityReport, ...] = ()
            passes = True
            if config is not None:
                selected, rejected = criticality.filter_pool(
                    [match], store, config, metric_params
                )
                scored = (selected or rejected)[0]
                reports, passes = scored.reports, scored.passes
            sid = session.next_scenario_id()
            session.scenarios[sid] = StoredScenario(
                scenario_id=sid,
                recording_id=body.recording_id,
                match=match,
                reports=reports,
                passes=passes,
                metric=config.kind.value if config else None,
            )
            pool.append({
                "scenario_id": sid,
                "ego_id": match.ego_id,
                "targets": [
                    {
                        "target_id": tw.target_id,
                        "window": [tw.frame_start, tw.frame_end],
                    }
                    for tw in match.targets
                ],
                "scenario_window": list(match.scenario_window),
                "reports": [_report_json(r) for r in reports],
                "passes": passes,
            })
        return {
            "pool": pool,
            "rejected_near_misses": [
                {
                    "ego_id": nm.ego_id,
                    "target_id": nm.target_id,
                    "window": list(nm.window),
                    "reasons": list(nm.reasons),
                }
                for nm in near_misses
            ],
        }

    def _scenario(session: Session, scenario_id: str) -> StoredScenario:
        stored = session.scenarios.get(scenario_id)
        if stored is None:
            raise HTTPException(404, detail=f"unknown scenario: {scenario_id!r}")
        return stored

    @app.get("/api/scenarios/{scenario_id}/frames")
    async def scenario_frames(
        scenario_id: str,
        stride: int = Query(1, ge=1),
        session_id: Optional[str] = Query(None),
    ):
        session = sessions.get(session_id)
        stored = _scenario(session, scenario_id)
        store = session.recordings[stored.recording_id]
        match = stored.match
        lo, hi = match.scenario_window
        frame_rate = store.config.frame_rate
        vehicles = [(match.ego_id, True)] + [
            (tw.target_id, False) for tw in match.targets
        ]
        series_by_target = {
            tw.target_id: report.series
            for tw, report in zip(match.targets, stored.reports)
        }
        frames = []
        for frame in range(lo, hi + 1, stride):
            states = []
            for vid, is_ego in vehicles:
                traj = store.get(vid)
                if not (traj.first_frame <= frame <= traj.last_frame):
                    continue
                i = traj.index_of(frame)
                states.append({
                    "id": vid,
                    "is_ego": is_ego,
                    "x": float(traj.x[i]),
                    "y": float(traj.y[i]),
                    "lane": int(traj.lane_id[i]),
                    "width": float(traj.width[i]),
                    "height": float(traj.height[i]),
                })
            metrics = {}
            for tw in match.targets:
                series = series_by_target.get(tw.target_id)
                if series is None:
                    continue
                k = frame - tw.frame_start
                metrics[str(tw.target_id)] = (
                    series[k] if 0 <= k < len(series) else None
                )
            frames.append({
                "frame": frame,
                "time": (frame - lo) / frame_rate,
                "vehicles": states,
                "metrics": metrics,
            })
        return {
            "scenario_id": scenario_id,
            "window": [lo, hi],
            "frame_rate": frame_rate,
            "metric": stored.metric,
            "frames": frames,
        }

    @app.get("/api/scenarios/{scenario_id}/export")
    async def export_scenario(
        scenario_id: str,
        format: str = Query(...),
        session_id: Optional[str] = Query(None),
    ):
        session = sessions.get(session_id)
        stored = _scenario(session, scenario_id)
        store = session.recordings[stored.recording_id]
        if format == "xosc":
            content = exporters.to_openscenario(stored.match, store)
            media, ext = "application/xml", "xosc"
        elif format == "cmtxt":
            content = exporters.to_carmaker_text(stored.match, store)
            media, ext = "text/plain", "txt"
        else:
            raise HTTPException(400, detail=f"unknown format: {format!r}")
        return Response(
            content=content,
            media_type=media,
            headers={
                "Content-Disposition":
                    f'attachment; filename="{scenario_id}.{ext}"'
            },
        )

    return app
