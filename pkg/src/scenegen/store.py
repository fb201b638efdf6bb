"""Append-only run store: one directory per pipeline run, atomic writes.

Layout under the store root:

    index.json                    id -> {dir, parent, status}
    runs/<id>/run.json            request, status, stage artifacts
    runs/<id>/plan.json           scene bundle ...
    runs/<id>/selection.json
    runs/<id>/frames.jsonl
    runs/<id>/meta.json
    runs/<id>/snapshots/tick_<k>.svg

Every file is written to a temp path and renamed, so a crash mid-run leaves
all previously completed artifacts readable.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .errors import NotFoundError

STATUS_PENDING = "pending"
STATUS_RUNNING = "running"
STATUS_FAILED = "failed"
STATUS_DONE = "done"


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _atomic_write(path: Path, data: bytes):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _dump(doc) -> bytes:
    return json.dumps(doc, indent=2, sort_keys=True).encode("utf-8")


@dataclass
class PipelineRun:
    id: str
    request: dict  # {prompt, map, mode, seed, backend}
    status: str = STATUS_PENDING
    stage: str | None = None
    error: dict | None = None  # {stage, type, message}
    artifacts: dict = field(default_factory=dict)
    parent: str | None = None
    created: str = field(default_factory=utc_now)
    finished: str | None = None
    outcome: dict | None = None
    frame_count: int = 0

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "request": self.request,
            "status": self.status,
            "stage": self.stage,
            "error": self.error,
            "artifacts": self.artifacts,
            "parent": self.parent,
            "created": self.created,
            "finished": self.finished,
            "outcome": self.outcome,
            "frames": self.frame_count,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PipelineRun":
        return cls(
            id=doc["id"],
            request=doc["request"],
            status=doc["status"],
            stage=doc.get("stage"),
            error=doc.get("error"),
            artifacts=doc.get("artifacts", {}),
            parent=doc.get("parent"),
            created=doc.get("created", ""),
            finished=doc.get("finished"),
            outcome=doc.get("outcome"),
            frame_count=doc.get("frames", 0),
        )


class SceneStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "runs").mkdir(exist_ok=True)
        self._lock = threading.Lock()
        self._index = self._load_index()

    def _load_index(self) -> dict:
        path = self.root / "index.json"
        if not path.exists():
            return {"version": 1, "runs": {}}
        try:
            return json.loads(path.read_text())
        except json.JSONDecodeError:
            # A torn index is rebuilt from the run directories themselves.
            runs = {}
            for run_dir in sorted((self.root / "runs").iterdir()):
                run_json = run_dir / "run.json"
                if run_json.exists():
                    doc = json.loads(run_json.read_text())
                    runs[doc["id"]] = {
                        "dir": f"runs/{run_dir.name}",
                        "parent": doc.get("parent"),
                        "status": doc.get("status", STATUS_FAILED),
                    }
            return {"version": 1, "runs": runs}

    def _save_index(self):
        _atomic_write(self.root / "index.json", _dump(self._index))

    def new_run(self, request: dict, parent: str | None = None) -> PipelineRun:
        run = PipelineRun(id=uuid.uuid4().hex[:12], request=request, parent=parent)
        self.save_run(run)
        return run

    def run_dir(self, run_id: str) -> Path:
        with self._lock:
            entry = self._index["runs"].get(run_id)
        if entry is None:
            raise NotFoundError(f"unknown run id: {run_id!r}")
        return self.root / entry["dir"]

    def save_run(self, run: PipelineRun):
        with self._lock:
            rel = f"runs/{run.id}"
            run_dir = self.root / rel
            run_dir.mkdir(parents=True, exist_ok=True)
            _atomic_write(run_dir / "run.json", _dump(run.to_json()))
            self._index["runs"][run.id] = {
                "dir": rel,
                "parent": run.parent,
                "status": run.status,
            }
            self._save_index()

    def load_run(self, run_id: str) -> PipelineRun:
        path = self.run_dir(run_id) / "run.json"
        if not path.exists():
            raise NotFoundError(f"run {run_id!r} has no run.json")
        return PipelineRun.from_json(json.loads(path.read_text()))

    def list_runs(self) -> list[dict]:
        with self._lock:
            entries = dict(self._index["runs"])
        rows = []
        for run_id, entry in entries.items():
            rows.append({"id": run_id, "status": entry["status"], "parent": entry["parent"]})
        rows.sort(key=lambda r: r["id"])
        return rows

    def lineage(self, run_id: str) -> list[str]:
        """Run ids from the root ancestor down to ``run_id``."""
        chain = [run_id]
        seen = {run_id}
        while True:
            parent = self.load_run(chain[0]).parent
            if parent is None or parent in seen:
                return chain
            chain.insert(0, parent)
            seen.add(parent)

    # -- scene bundle ---------------------------------------------------------

    def write_artifact(self, run: PipelineRun, name: str, payload: dict):
        run.artifacts[name] = payload
        self.save_run(run)

    def write_scene(self, run: PipelineRun, scene, snapshot_ticks=(0, -1)):
        from .simulator.svg import render_svg

        run_dir = self.run_dir(run.id)
        _atomic_write(run_dir / "plan.json", _dump(scene.provenance["plan"]))
        _atomic_write(run_dir / "selection.json", _dump(scene.provenance["selection"]))
        _atomic_write(run_dir / "frames.jsonl", scene.to_jsonl().encode("utf-8"))
        meta = {
            "prompt": scene.provenance["prompt"],
            "map": run.request.get("map"),
            "mode": run.request.get("mode"),
            "seed": scene.provenance["seed"],
            "weather": scene.provenance["weather"],
            "outcome": scene.outcome,
            "frames": len(scene.frames),
            "final_state": list(scene.final_state),
        }
        _atomic_write(run_dir / "meta.json", _dump(meta))
        snap_dir = run_dir / "snapshots"
        snap_dir.mkdir(exist_ok=True)
        ticks = sorted({t % len(scene.frames) for t in snapshot_ticks})
        for tick in ticks:
            svg = render_svg(scene.graph, list(scene.frames[tick].agents), title=f"tick {tick}")
            _atomic_write(snap_dir / f"tick_{tick:06d}.svg", svg)
        run.outcome = scene.outcome
        run.frame_count = len(scene.frames)

    def load_meta(self, run_id: str) -> dict:
        path = self.run_dir(run_id) / "meta.json"
        if not path.exists():
            raise NotFoundError(f"run {run_id!r} has no scene")
        return json.loads(path.read_text())

    def load_frames(self, run_id: str, start: int = 0, end: int | None = None) -> list[dict]:
        path = self.run_dir(run_id) / "frames.jsonl"
        if not path.exists():
            raise NotFoundError(f"run {run_id!r} has no frames")
        frames = []
        with path.open() as fh:
            for i, line in enumerate(fh):
                if i < start:
                    continue
                if end is not None and i >= end:
                    break
                line = line.strip()
                if line:
                    frames.append(json.loads(line))
        return frames
