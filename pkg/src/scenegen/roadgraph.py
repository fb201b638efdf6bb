"""Immutable directed road graph with turn-labelled connectivity.

Nodes are *directed* roads: an OpenDRIVE road carrying lanes on both sides
becomes two nodes sharing a base id (the reverse direction gets a ``.r``
suffix). Edges describe drivable transitions labelled left/right/straight.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import GraphConsistencyError, NotFoundError, SerializationError
from .geometry import DirectedRef, ReferenceLine, RefSegment

GRAPH_FORMAT_VERSION = 1

REVERSE_SUFFIX = ".r"


def base_road_id(road_id: str) -> str:
    """Strip the direction suffix; both directions of a road share this id."""
    return road_id[: -len(REVERSE_SUFFIX)] if road_id.endswith(REVERSE_SUFFIX) else road_id


@dataclass(frozen=True)
class Lane:
    lane_id: int  # signed OpenDRIVE id; sign encodes the side of the road
    kind: str  # driving | sidewalk | shoulder
    width: float

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError(f"lane {self.lane_id}: width must be positive")


@dataclass(frozen=True)
class RoadNode:
    """One direction of travel along a road.

    ``lanes`` are ordered innermost (traveller's left) to outermost
    (traveller's right). ``junction_options`` is non-empty exactly when the
    road ends at a junction.
    """

    id: str
    base_id: str
    length: float
    lanes: tuple[Lane, ...]
    signals: frozenset[str]
    objects: frozenset[str]
    is_junction: bool
    junction_options: frozenset[str]
    ref: DirectedRef

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError(f"road {self.id}: length must be positive")

    @property
    def driving_lanes(self) -> tuple[Lane, ...]:
        return tuple(l for l in self.lanes if l.kind == "driving")

    def lanes_of_kind(self, kind: str) -> tuple[Lane, ...]:
        return tuple(l for l in self.lanes if l.kind == kind)

    def lane(self, lane_id: int) -> Lane:
        for l in self.lanes:
            if l.lane_id == lane_id:
                return l
        raise NotFoundError(f"road {self.id} has no lane {lane_id}")

    def lane_index(self, lane_id: int) -> int:
        for i, l in enumerate(self.lanes):
            if l.lane_id == lane_id:
                return i
        raise NotFoundError(f"road {self.id} has no lane {lane_id}")

    def lane_center_offset(self, lane_id: int) -> float:
        """Lateral offset of a lane centre in the travel frame (negative: right)."""
        cum = 0.0
        for l in self.lanes:
            if l.lane_id == lane_id:
                return -(cum + l.width / 2.0)
            cum += l.width
        raise NotFoundError(f"road {self.id} has no lane {lane_id}")

    def pose_at(self, s_travel: float, lane_id: int, extra_lateral: float = 0.0):
        return self.ref.pose_at(s_travel, self.lane_center_offset(lane_id) + extra_lateral)

    def end_pose(self):
        return self.ref.end_pose()


@dataclass(frozen=True)
class Connection:
    from_id: str
    to_id: str
    turn: str  # left | right | straight
    lane_map: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class RoadGraph:
    map_name: str
    nodes: dict[str, RoadNode]
    edges: tuple[Connection, ...]
    _out: dict[str, tuple[Connection, ...]] = field(default_factory=dict, compare=False, repr=False)
    _in: dict[str, tuple[Connection, ...]] = field(default_factory=dict, compare=False, repr=False)

    @staticmethod
    def build(map_name: str, nodes: list[RoadNode], edges: list[Connection]) -> "RoadGraph":
        node_map = {n.id: n for n in nodes}
        for e in edges:
            for rid in (e.from_id, e.to_id):
                if rid not in node_map:
                    raise GraphConsistencyError(
                        f"connection {e.from_id} -> {e.to_id} references unknown road {rid}",
                        road_id=rid,
                    )
            for lf, lt in e.lane_map:
                node_map[e.from_id].lane(lf)
                node_map[e.to_id].lane(lt)
        ordered = tuple(sorted(edges, key=lambda e: (e.from_id, e.to_id, e.turn)))
        out: dict[str, list[Connection]] = {}
        inc: dict[str, list[Connection]] = {}
        for e in ordered:
            out.setdefault(e.from_id, []).append(e)
            inc.setdefault(e.to_id, []).append(e)
        return RoadGraph(
            map_name=map_name,
            nodes=node_map,
            edges=ordered,
            _out={k: tuple(v) for k, v in out.items()},
            _in={k: tuple(v) for k, v in inc.items()},
        )

    def __eq__(self, other):
        if not isinstance(other, RoadGraph):
            return NotImplemented
        return (
            self.map_name == other.map_name
            and self.nodes == other.nodes
            and self.edges == other.edges
        )

    def node(self, road_id: str) -> RoadNode:
        try:
            return self.nodes[road_id]
        except KeyError:
            raise NotFoundError(f"unknown road id: {road_id!r}") from None

    def outgoing(self, road_id: str) -> tuple[Connection, ...]:
        self.node(road_id)
        return self._out.get(road_id, ())

    def incoming(self, road_id: str) -> tuple[Connection, ...]:
        self.node(road_id)
        return self._in.get(road_id, ())

    def reverse_twin(self, road_id: str) -> RoadNode | None:
        """The opposite-direction node of the same road, if it exists."""
        base = base_road_id(road_id)
        twin = base if road_id.endswith(REVERSE_SUFFIX) else base + REVERSE_SUFFIX
        return self.nodes.get(twin)


def neighbors(graph: RoadGraph, road_id: str, turn: str | None = None) -> list[RoadNode]:
    """Roads reachable from ``road_id``, optionally filtered by turn label."""
    return [
        graph.node(e.to_id)
        for e in graph.outgoing(road_id)
        if turn is None or e.turn == turn
    ]


def predecessors(graph: RoadGraph, road_id: str) -> list[RoadNode]:
    return [graph.node(e.from_id) for e in graph.incoming(road_id)]


def has_adjacent_straight(graph: RoadGraph, road_id: str, relative: str) -> bool:
    """True when the road reached via ``relative`` can itself continue straight."""
    if relative not in ("left", "right"):
        raise ValueError(f"relative must be 'left' or 'right', got {relative!r}")
    return any("straight" in n.junction_options for n in neighbors(graph, road_id, relative))


def _lane_to_json(lane: Lane) -> dict:
    return {"lane_id": lane.lane_id, "kind": lane.kind, "width": lane.width}


def _node_to_json(node: RoadNode) -> dict:
    return {
        "id": node.id,
        "base_id": node.base_id,
        "length": node.length,
        "lanes": [_lane_to_json(l) for l in node.lanes],
        "signals": sorted(node.signals),
        "objects": sorted(node.objects),
        "is_junction": node.is_junction,
        "junction_options": sorted(node.junction_options),
        "geometry": {
            "forward": node.ref.forward,
            "segments": [
                {
                    "kind": seg.kind,
                    "x": seg.x,
                    "y": seg.y,
                    "hdg": seg.hdg,
                    "length": seg.length,
                    "curvature": seg.curvature,
                }
                for seg in node.ref.ref.segments
            ],
        },
    }


def graph_to_json(graph: RoadGraph) -> dict:
    return {
        "version": GRAPH_FORMAT_VERSION,
        "map_name": graph.map_name,
        "nodes": [_node_to_json(graph.nodes[k]) for k in sorted(graph.nodes)],
        "edges": [
            {"from": e.from_id, "to": e.to_id, "turn": e.turn, "lane_map": [list(p) for p in e.lane_map]}
            for e in graph.edges
        ],
    }


def save_graph(graph: RoadGraph) -> bytes:
    return json.dumps(graph_to_json(graph), sort_keys=True).encode("utf-8")


def graph_from_json(doc: dict) -> RoadGraph:
    try:
        if doc["version"] != GRAPH_FORMAT_VERSION:
            raise SerializationError(
                f"unsupported graph version {doc['version']!r}, expected {GRAPH_FORMAT_VERSION}"
            )
        nodes = []
        for nd in doc["nodes"]:
            segments = tuple(
                RefSegment(
                    kind=s["kind"],
                    x=s["x"],
                    y=s["y"],
                    hdg=s["hdg"],
                    length=s["length"],
                    curvature=s.get("curvature", 0.0),
                )
                for s in nd["geometry"]["segments"]
            )
            nodes.append(
                RoadNode(
                    id=nd["id"],
                    base_id=nd["base_id"],
                    length=nd["length"],
                    lanes=tuple(Lane(l["lane_id"], l["kind"], l["width"]) for l in nd["lanes"]),
                    signals=frozenset(nd["signals"]),
                    objects=frozenset(nd["objects"]),
                    is_junction=nd["is_junction"],
                    junction_options=frozenset(nd["junction_options"]),
                    ref=DirectedRef(ReferenceLine(segments), nd["geometry"]["forward"]),
                )
            )
        edges = [
            Connection(
                from_id=ed["from"],
                to_id=ed["to"],
                turn=ed["turn"],
                lane_map=tuple((int(a), int(b)) for a, b in ed["lane_map"]),
            )
            for ed in doc["edges"]
        ]
        return RoadGraph.build(doc["map_name"], nodes, edges)
    except SerializationError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SerializationError(f"corrupt graph payload: {exc}") from exc


def load_graph(payload: bytes) -> RoadGraph:
    try:
        doc = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SerializationError(f"corrupt graph payload: {exc}") from exc
    if not isinstance(doc, dict):
        raise SerializationError("corrupt graph payload: not a JSON object")
    return graph_from_json(doc)
