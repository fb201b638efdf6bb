"""Deterministic bird's-eye SVG snapshots of a rendered scene."""

from __future__ import annotations

import math

from ..errors import RangeError
from ..geometry import obb_corners
from ..roadgraph import RoadGraph
from .engine import Scene
from .profiles import footprint

_LANE_FILL = {"driving": "#9aa0a6", "shoulder": "#c8a165", "sidewalk": "#d7d7d7"}

_AGENT_FILL = {
    "car": "#3b73c4",
    "police": "#1f3a93",
    "ambulance": "#e0e0e0",
    "firetruck": "#c0392b",
    "bus": "#8e44ad",
    "truck": "#7f8c8d",
    "motorcycle": "#16a085",
    "cyclist": "#27ae60",
    "pedestrian": "#e67e22",
}


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _lane_polygon(node, lane_id: int) -> str:
    lane = node.lane(lane_id)
    center = node.lane_center_offset(lane_id)
    half = lane.width / 2.0
    step = max(2.0, node.length / 24.0)
    n = max(2, int(node.length / step))
    left_pts = []
    right_pts = []
    for k in range(n + 1):
        s = node.length * k / n
        lx, ly, _ = node.ref.pose_at(s, center + half)
        rx, ry, _ = node.ref.pose_at(s, center - half)
        left_pts.append((lx, ly))
        right_pts.append((rx, ry))
    pts = left_pts + list(reversed(right_pts))
    return " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)


def _signal_glyphs(node, parts: list):
    x, y, _ = node.end_pose()
    offset = 0
    for signal in sorted(node.signals):
        color = {"traffic light": "#2ecc71", "stop sign": "#c0392b", "yield sign": "#f1c40f"}[signal]
        parts.append(
            f'<circle cx="{_fmt(x + offset)}" cy="{_fmt(y - 3)}" r="1.4" fill="{color}">'
            f"<title>{signal}</title></circle>"
        )
        offset += 3.5


def _object_glyphs(node, parts: list):
    x, y, _ = node.ref.pose_at(node.length * 0.75)
    offset = 0
    for obj in sorted(node.objects):
        parts.append(
            f'<rect x="{_fmt(x + offset)}" y="{_fmt(y + 2)}" width="2.4" height="2.4" '
            f'fill="#ecf0f1" stroke="#555" stroke-width="0.2"><title>{obj}</title></rect>'
        )
        offset += 3.2


def render_svg(graph: RoadGraph, frame_agents: list[dict], title: str = "") -> bytes:
    xs: list[float] = []
    ys: list[float] = []
    for node in graph.nodes.values():
        for s in (0.0, node.length / 2.0, node.length):
            x, y, _ = node.ref.pose_at(s)
            xs.append(x)
            ys.append(y)
    for agent in frame_agents:
        xs.append(agent["x"])
        ys.append(agent["y"])
    pad = 15.0
    min_x, max_x = min(xs) - pad, max(xs) + pad
    min_y, max_y = min(ys) - pad, max(ys) + pad
    width = max_x - min_x
    height = max_y - min_y

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_fmt(min_x)} {_fmt(-max_y)} '
        f'{_fmt(width)} {_fmt(height)}" width="900" height="{_fmt(900 * height / width)}">',
        # Flip the y axis so north is up.
        f'<g transform="scale(1,-1)">',
        f'<rect x="{_fmt(min_x)}" y="{_fmt(min_y)}" width="{_fmt(width)}" height="{_fmt(height)}" fill="#f4f1ea"/>',
    ]
    if title:
        parts.append(f"<title>{title}</title>")

    for rid in sorted(graph.nodes):
        node = graph.nodes[rid]
        for lane in node.lanes:
            parts.append(
                f'<polygon points="{_lane_polygon(node, lane.lane_id)}" '
                f'fill="{_LANE_FILL[lane.kind]}" stroke="#6b6b6b" stroke-width="0.15"/>'
            )
    for rid in sorted(graph.nodes):
        node = graph.nodes[rid]
        _signal_glyphs(node, parts)
        _object_glyphs(node, parts)

    for agent in frame_agents:
        length, agent_width = footprint(agent["type"])
        fill = _AGENT_FILL[agent["type"]]
        if agent["type"] == "pedestrian":
            parts.append(
                f'<circle cx="{_fmt(agent["x"])}" cy="{_fmt(agent["y"])}" r="0.6" '
                f'fill="{fill}" class="agent"><title>{agent["id"]}</title></circle>'
            )
            continue
        corners = obb_corners(agent["x"], agent["y"], agent["heading"], length, agent_width)
        points = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in corners)
        parts.append(
            f'<polygon points="{points}" fill="{fill}" stroke="#222" stroke-width="0.2" '
            f'class="agent"><title>{agent["id"]}</title></polygon>'
        )
        tip_x = agent["x"] + math.cos(agent["heading"]) * length / 2.0
        tip_y = agent["y"] + math.sin(agent["heading"]) * length / 2.0
        parts.append(
            f'<circle cx="{_fmt(tip_x)}" cy="{_fmt(tip_y)}" r="0.35" fill="#fff"/>'
        )

    parts.append("</g></svg>")
    return "".join(parts).encode("utf-8")


def snapshot_svg(scene: Scene, tick: int) -> bytes:
    """Draw one frame of a scene; raises RangeError for ticks outside it."""
    if not (0 <= tick < len(scene.frames)):
        raise RangeError(f"tick {tick} outside rendered range 0..{len(scene.frames) - 1}")
    if scene.graph is None:
        raise ValueError("scene carries no road graph")
    frame = scene.frames[tick]
    return render_svg(scene.graph, list(frame.agents), title=f"tick {tick}")
