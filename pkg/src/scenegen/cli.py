"""Command-line interface."""

from __future__ import annotations

import json
import shutil
import sys
from pathlib import Path

import click

from .errors import SceneGenError
from .opendrive import parse_opendrive
from .pipeline import MapRegistry, continue_run, make_backend, rank_plan_file, run_pipeline
from .planner import MODES, PromptRequest
from .roadgraph import graph_to_json
from .store import SceneStore


@click.group()
def main():
    """Generate executable traffic scenes from natural-language descriptions."""


def _print_run(run):
    click.echo(f"run {run.id}: {run.status}")
    if run.error:
        click.echo(f"  failed at {run.error['stage']}: {run.error['type']}: {run.error['message']}")
    if run.outcome:
        click.echo(f"  outcome: {run.outcome['kind']}  frames: {run.frame_count}")
    selection = run.artifacts.get("selection")
    if selection:
        click.echo(f"  road: {selection['chosen']}")


@main.command()
@click.option("--map", "map_name", required=True, help="Map name from the maps directory.")
@click.option("--prompt", required=True, help="Scene description.")
@click.option("--backend", default="mock", show_default=True,
              help="mock | remote | replay:<transcript.jsonl>")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--mode", default="analysis_then_stage", show_default=True,
              type=click.Choice(MODES))
@click.option("--store", "store_dir", default="runs", show_default=True)
@click.option("--maps-dir", default=None, help="Directory of .xodr maps (default: bundled).")
@click.option("--out", default=None, help="Also copy the scene bundle to this directory.")
def generate(map_name, prompt, backend, seed, mode, store_dir, maps_dir, out):
    """Run the full pipeline for one prompt."""
    store = SceneStore(store_dir)
    registry = MapRegistry(maps_dir)
    request = PromptRequest(text=prompt, mode=mode, seed=seed)
    run = run_pipeline(store, registry, request, map_name, make_backend(backend, seed), backend)
    _print_run(run)
    if out and run.status == "done":
        src = store.run_dir(run.id)
        dst = Path(out)
        dst.mkdir(parents=True, exist_ok=True)
        for name in ("run.json", "plan.json", "selection.json", "frames.jsonl", "meta.json"):
            shutil.copy2(src / name, dst / name)
        if (src / "snapshots").exists():
            shutil.copytree(src / "snapshots", dst / "snapshots", dirs_exist_ok=True)
        click.echo(f"  bundle copied to {dst}")
    sys.exit(0 if run.status == "done" else 1)


@main.command(name="continue")
@click.option("--parent", required=True, help="Run id to continue from.")
@click.option("--prompt", required=True)
@click.option("--backend", default="mock", show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--mode", default="analysis_then_stage", show_default=True,
              type=click.Choice(MODES))
@click.option("--store", "store_dir", default="runs", show_default=True)
@click.option("--maps-dir", default=None)
def continue_cmd(parent, prompt, backend, seed, mode, store_dir, maps_dir):
    """Continue a finished run; the new scene starts from its final poses."""
    store = SceneStore(store_dir)
    registry = MapRegistry(maps_dir)
    request = PromptRequest(text=prompt, mode=mode, seed=seed)
    try:
        run = continue_run(store, registry, parent, request, make_backend(backend, seed), backend)
    except SceneGenError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    _print_run(run)
    sys.exit(0 if run.status == "done" else 1)


@main.command()
@click.option("--map", "map_name", required=True)
@click.option("--plan", "plan_path", required=True, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--maps-dir", default=None)
def rank(map_name, plan_path, seed, maps_dir):
    """Score every eligible road for a plan and print the ranking table."""
    registry = MapRegistry(maps_dir)
    try:
        selection, _plan = rank_plan_file(registry, map_name, plan_path, seed)
    except SceneGenError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    checks = sorted({name for entry in selection.scores.values() for name in entry["per_check"]})
    header = ["road"] + checks + ["total"]
    widths = [max(len(h), 6) for h in header]
    click.echo("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for road in sorted(selection.scores, key=lambda r: (-selection.scores[r]["total"], r)):
        entry = selection.scores[road]
        cells = [road] + ["yes" if entry["per_check"].get(c) else "-" for c in checks]
        cells.append(str(entry["total"]))
        click.echo("  ".join(c.ljust(w) for c, w in zip(cells, widths)))
    click.echo(f"chosen: {selection.chosen} (seed {selection.seed})")


@main.command(name="parse-map")
@click.argument("xodr_file", type=click.Path(exists=True))
@click.option("--out", default=None, help="Write the graph JSON here.")
def parse_map(xodr_file, out):
    """Parse an OpenDRIVE file and summarize the resulting road graph."""
    try:
        graph = parse_opendrive(Path(xodr_file).read_text(), map_name=Path(xodr_file).stem)
    except SceneGenError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"map {graph.map_name}: {len(graph.nodes)} directed roads, {len(graph.edges)} connections")
    for rid in sorted(graph.nodes):
        node = graph.nodes[rid]
        kinds = ",".join(f"{l.kind}" for l in node.lanes)
        opts = "/".join(sorted(node.junction_options)) or "-"
        click.echo(f"  {rid:<8} len={node.length:<7.1f} lanes=[{kinds}] turns={opts}")
    if out:
        Path(out).write_text(json.dumps(graph_to_json(graph), indent=2, sort_keys=True))
        click.echo(f"graph written to {out}")


@main.command()
@click.option("--store", "store_dir", default="runs", show_default=True)
@click.option("--maps-dir", default=None)
@click.option("--studio", "studio_dir", default=None, help="Directory with the built studio app.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8008, show_default=True, type=int)
def serve(store_dir, maps_dir, studio_dir, host, port):
    """Serve the HTTP API (and the studio, when built)."""
    import uvicorn

    from .server import create_app

    app = create_app(store_dir=store_dir, maps_dir=maps_dir, studio_dir=studio_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
