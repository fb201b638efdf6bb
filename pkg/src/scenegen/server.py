"""HTTP service around the pipeline and the scene store.

Reads of finished runs never recompute anything; they stream stored files.
Run execution is synchronous per request with a bounded number of slots.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import HTMLResponse, JSONResponse, PlainTextResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .errors import NotFoundError, ParentNotDoneError, SceneGenError
from .pipeline import MapRegistry, continue_run, make_backend, run_pipeline
from .planner import MODES, PromptRequest
from .simulator.svg import render_svg
from .store import SceneStore

MAX_CONCURRENT_RUNS = 4


class RunRequest(BaseModel):
    prompt: str
    map: str
    seed: int = 0
    backend: str = "mock"
    mode: str = "analysis_then_stage"


class ContinueRequest(BaseModel):
    prompt: str
    seed: int = 0
    backend: str = "mock"
    mode: str = "analysis_then_stage"


def create_app(
    store_dir: str | Path = "runs",
    maps_dir: str | Path | None = None,
    studio_dir: str | Path | None = None,
) -> FastAPI:
    store = SceneStore(store_dir)
    registry = MapRegistry(maps_dir)
    slots = threading.Semaphore(MAX_CONCURRENT_RUNS)
    app = FastAPI(title="scenegen", version="0.1.0")
    app.state.store = store
    app.state.registry = registry

    def _request_of(body) -> PromptRequest:
        if body.mode not in MODES:
            raise HTTPException(status_code=422, detail=f"unknown mode {body.mode!r}")
        if not body.prompt.strip():
            raise HTTPException(status_code=422, detail="prompt must not be empty")
        return PromptRequest(text=body.prompt, mode=body.mode, seed=body.seed)

    @app.exception_handler(NotFoundError)
    async def _not_found(request: Request, exc: NotFoundError):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(ParentNotDoneError)
    async def _parent_not_done(request: Request, exc: ParentNotDoneError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.get("/maps")
    def list_maps():
        rows = []
        for name in registry.names():
            graph = registry.graph(name)
            rows.append(
                {
                    "name": name,
                    "roads": len(graph.nodes),
                    "connections": len(graph.edges),
                }
            )
        return rows

    @app.get("/maps/{name}")
    def map_digest(name: str):
        return registry.digest(name)

    @app.get("/maps/{name}/graph")
    def map_graph(name: str):
        return registry.graph_json(name)

    @app.post("/runs")
    def create_run(body: RunRequest):
        request = _request_of(body)
        try:
            backend = make_backend(body.backend, seed=body.seed)
        except (ValueError, SceneGenError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        registry.graph(body.map)  # 404 for unknown maps before creating a run
        with slots:
            run = run_pipeline(store, registry, request, body.map, backend, body.backend)
        return run.to_json()

    @app.get("/runs")
    def list_runs():
        return store.list_runs()

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        return store.load_run(run_id).to_json()

    @app.get("/runs/{run_id}/frames")
    def get_frames(run_id: str, start: int = Query(0, ge=0), end: int | None = Query(None)):
        frames = store.load_frames(run_id, start=start, end=end)
        import json as _json

        body = "\n".join(_json.dumps(f, sort_keys=True, separators=(",", ":")) for f in frames)
        return PlainTextResponse(body + ("\n" if body else ""), media_type="application/jsonl")

    @app.get("/runs/{run_id}/snapshot")
    def get_snapshot(run_id: str, tick: int = Query(0, ge=0)):
        run = store.load_run(run_id)
        frames = store.load_frames(run_id, start=tick, end=tick + 1)
        if not frames:
            raise HTTPException(status_code=416, detail=f"tick {tick} out of range")
        graph = registry.graph(run.request["map"])
        svg = render_svg(graph, frames[0]["agents"], title=f"tick {tick}")
        return Response(content=svg, media_type="image/svg+xml")

    @app.get("/runs/{run_id}/scores")
    def get_scores(run_id: str):
        run = store.load_run(run_id)
        selection = run.artifacts.get("selection")
        if selection is None:
            raise HTTPException(status_code=404, detail="run has no ranking artifact")
        return selection

    @app.post("/runs/{run_id}/continue")
    def post_continue(run_id: str, body: ContinueRequest):
        request = _request_of(body)
        try:
            backend = make_backend(body.backend, seed=body.seed)
        except (ValueError, SceneGenError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        with slots:
            run = continue_run(store, registry, run_id, request, backend, body.backend)
        return run.to_json()

    @app.get("/runs/{run_id}/lineage")
    def get_lineage(run_id: str):
        return store.lineage(run_id)

    if studio_dir is not None and Path(studio_dir).exists():
        app.mount("/studio", StaticFiles(directory=str(studio_dir), html=True), name="studio")

        @app.get("/", response_class=HTMLResponse)
        def index():
            return '<meta http-equiv="refresh" content="0; url=/studio/">'

    return app
