"""Pipeline orchestration: analyze, retrieve, plan, rank, render, persist.

Every stage's artifact is persisted as soon as it exists, so a failed run
keeps everything produced before the failure, labelled with the stage that
broke.
"""

from __future__ import annotations

import json
import types
from pathlib import Path

from importlib import resources

from .backends import RemoteBackend, ReplayBackend
from .errors import NotFoundError, ParentNotDoneError, SceneGenError
from .mock_backend import MockBackend
from .opendrive import parse_opendrive
from .planner import PromptRequest, TokenUsage, analyze, derive_conditions, plan_agents
from .ranker import rank_and_select, retrieve_candidates
from .roadgraph import RoadGraph, graph_to_json, load_graph, save_graph
from .schema import ScenePlan
from .simulator import SimConfig, continue_sequence, render_scene
from .store import STATUS_DONE, STATUS_FAILED, STATUS_RUNNING, PipelineRun, SceneStore, utc_now

STAGE_ANALYSIS = "analysis"
STAGE_RETRIEVAL = "retrieval"
STAGE_PLANNING = "planning"
STAGE_RANKING = "ranking"
STAGE_RENDERING = "rendering"


def default_maps_dir() -> Path:
    return Path(str(resources.files("scenegen") / "maps"))


class MapRegistry:
    """Loads .xodr files from a directory, caching parsed graphs beside them."""

    def __init__(self, maps_dir: str | Path | None = None):
        self.maps_dir = Path(maps_dir) if maps_dir else default_maps_dir()
        self._graphs: dict[str, RoadGraph] = {}

    def names(self) -> list[str]:
        return sorted(p.stem for p in self.maps_dir.glob("*.xodr"))

    def graph(self, name: str) -> RoadGraph:
        if name in self._graphs:
            return self._graphs[name]
        xodr = self.maps_dir / f"{name}.xodr"
        if not xodr.exists():
            raise NotFoundError(f"unknown map {name!r}; available: {self.names()}")
        cache = self.maps_dir / f"{name}.graph.json"
        graph = None
        if cache.exists() and cache.stat().st_mtime >= xodr.stat().st_mtime:
            try:
                graph = load_graph(cache.read_bytes())
            except SceneGenError:
                graph = None
        if graph is None:
            graph = parse_opendrive(xodr.read_text(), map_name=name)
            try:
                cache.write_bytes(save_graph(graph))
            except OSError:
                pass  # read-only installs still work, just without the cache
        self._graphs[name] = graph
        return graph

    def digest(self, name: str) -> dict:
        """Render-ready lane polylines for the studio."""
        graph = self.graph(name)
        roads = []
        for rid in sorted(graph.nodes):
            node = graph.nodes[rid]
            lanes = []
            for lane in node.lanes:
                center = node.lane_center_offset(lane.lane_id)
                step = max(2.0, node.length / 32.0)
                n = max(2, int(node.length / step))
                polyline = []
                for k in range(n + 1):
                    x, y, _ = node.ref.pose_at(node.length * k / n, center)
                    polyline.append([round(x, 2), round(y, 2)])
                lanes.append(
                    {
                        "lane_id": lane.lane_id,
                        "kind": lane.kind,
                        "width": lane.width,
                        "polyline": polyline,
                    }
                )
            roads.append(
                {
                    "id": node.id,
                    "base_id": node.base_id,
                    "length": node.length,
                    "lanes": lanes,
                    "signals": sorted(node.signals),
                    "objects": sorted(node.objects),
                    "junction_options": sorted(node.junction_options),
                }
            )
        return {"name": name, "roads": roads}

    def graph_json(self, name: str) -> dict:
        return graph_to_json(self.graph(name))


def make_backend(spec: str, seed: int = 0):
    """Backend factory for 'mock', 'remote', or 'replay:<transcript path>'."""
    if spec == "mock":
        return MockBackend(seed=seed)
    if spec == "remote":
        return RemoteBackend()
    if spec.startswith("replay:"):
        return ReplayBackend(spec.split(":", 1)[1])
    raise ValueError(f"unknown backend {spec!r}; expected mock, remote, or replay:<path>")


def run_pipeline(
    store: SceneStore,
    registry: MapRegistry,
    request: PromptRequest,
    map_name: str,
    backend,
    backend_name: str = "mock",
    sim_config: SimConfig | None = None,
) -> PipelineRun:
    """Execute all stages in order, persisting each artifact as it lands."""
    run = store.new_run(
        {
            "prompt": request.text,
            "map": map_name,
            "mode": request.mode,
            "seed": request.seed,
            "backend": backend_name,
        }
    )
    run.status = STATUS_RUNNING
    store.save_run(run)
    usage = TokenUsage()
    config = sim_config or SimConfig(seed=request.seed)
    stage = STAGE_ANALYSIS
    try:
        graph = registry.graph(map_name)
        context = None
        if request.uses_analysis:
            run.stage = stage
            context = analyze(request, backend, usage)
            store.write_artifact(run, "analysis", context.to_payload())

        stage = STAGE_RETRIEVAL
        run.stage = stage
        conditions = derive_conditions(request, context, backend, usage)
        store.write_artifact(run, "conditions", conditions.to_payload())
        candidates = retrieve_candidates(graph, conditions)

        stage = STAGE_PLANNING
        run.stage = stage
        plan = plan_agents(request, context, backend, usage)
        store.write_artifact(run, "plan", plan.to_payload())

        stage = STAGE_RANKING
        run.stage = stage
        selection = rank_and_select(graph, candidates, plan, request.seed)
        store.write_artifact(run, "selection", selection.to_json())

        stage = STAGE_RENDERING
        run.stage = stage
        scene = render_scene(graph, selection, plan, config, prompt=request.text)
        store.write_scene(run, scene)

        run.status = STATUS_DONE
        run.stage = None
    except SceneGenError as exc:
        run.status = STATUS_FAILED
        run.error = {"stage": stage, "type": type(exc).__name__, "message": str(exc)}
    finally:
        run.artifacts["usage"] = {
            "calls": usage.calls,
            "prompt_tokens": usage.prompt_tokens,
            "completion_tokens": usage.completion_tokens,
        }
        run.finished = utc_now()
        store.save_run(run)
    return run


def continue_run(
    store: SceneStore,
    registry: MapRegistry,
    parent_id: str,
    request: PromptRequest,
    backend,
    backend_name: str = "mock",
    sim_config: SimConfig | None = None,
) -> PipelineRun:
    """Sequential continuation: analysis and planning only, frames chained."""
    parent = store.load_run(parent_id)  # NotFoundError for unknown ids
    if parent.status != STATUS_DONE:
        raise ParentNotDoneError(
            f"run {parent_id} is {parent.status}; only done runs can be continued"
        )
    parent_meta = store.load_meta(parent_id)
    map_name = parent.request["map"]

    run = store.new_run(
        {
            "prompt": request.text,
            "map": map_name,
            "mode": request.mode,
            "seed": request.seed,
            "backend": backend_name,
        },
        parent=parent_id,
    )
    run.status = STATUS_RUNNING
    store.save_run(run)
    usage = TokenUsage()
    config = sim_config or SimConfig(seed=request.seed)
    stage = STAGE_ANALYSIS
    try:
        graph = registry.graph(map_name)
        context = None
        if request.uses_analysis:
            run.stage = stage
            context = analyze(request, backend, usage)
            store.write_artifact(run, "analysis", context.to_payload())

        stage = STAGE_PLANNING
        run.stage = stage
        plan = plan_agents(request, context, backend, usage)
        store.write_artifact(run, "plan", plan.to_payload())

        stage = STAGE_RENDERING
        run.stage = stage
        prev = types.SimpleNamespace(final_state=tuple(parent_meta["final_state"]))
        scene = continue_sequence(graph, prev, plan, config, prompt=request.text)
        store.write_scene(run, scene)
        store.write_artifact(run, "selection", scene.provenance["selection"])

        run.status = STATUS_DONE
        run.stage = None
    except SceneGenError as exc:
        run.status = STATUS_FAILED
        run.error = {"stage": stage, "type": type(exc).__name__, "message": str(exc)}
    finally:
        run.artifacts["usage"] = {
            "calls": usage.calls,
            "prompt_tokens": usage.prompt_tokens,
            "completion_tokens": usage.completion_tokens,
        }
        run.finished = utc_now()
        store.save_run(run)
    return run


def rank_plan_file(registry: MapRegistry, map_name: str, plan_path: str | Path, seed: int = 0):
    """Load a plan JSON, score every eligible road, and return the selection."""
    from .schema import validate

    doc = json.loads(Path(plan_path).read_text())
    report = validate("planning", doc)
    if not report.ok:
        raise SceneGenError(
            "plan file is invalid: "
            + "; ".join(f"{d.path}: {d.message}" for d in report.diagnostics)
        )
    plan = ScenePlan.from_payload(doc)
    graph = registry.graph(map_name)
    from .schema import ConditionSet

    candidates = retrieve_candidates(graph, ConditionSet(number_of_lanes=1))
    return rank_and_select(graph, candidates, plan, seed), plan
