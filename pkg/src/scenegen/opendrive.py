"""OpenDRIVE (`.xodr`) parsing into a RoadGraph.

Supported subset: header, roads with line/arc plan-view geometry, a single
lane section with left/center/right lanes of constant width, road-level
signals and objects, road links, and junctions with laneLink records. Other
geometry primitives are rejected explicitly rather than approximated.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .defaults import STRAIGHT_THRESHOLD_DEG
from .errors import GraphConsistencyError, ParseError
from .geometry import DirectedRef, ReferenceLine, RefSegment, turn_label, wrap_angle
from .roadgraph import REVERSE_SUFFIX, Connection, Lane, RoadGraph, RoadNode
from .vocab import SIGNALS, is_object

# OpenDRIVE signal type codes seen in practice, plus readable names for fixtures.
_SIGNAL_TYPE_CODES = {
    "1000001": "traffic light",
    "206": "stop sign",
    "205": "yield sign",
}

_LANE_KINDS = {"driving", "sidewalk", "shoulder"}


@dataclass
class _RawRoad:
    rid: str
    length: float
    ref: ReferenceLine
    right_lanes: list[Lane]
    left_lanes: list[Lane]
    signals: set[str]
    objects: set[str]
    successor: tuple[str, str, str] | None = None  # (elementType, elementId, contactPoint)
    predecessor: tuple[str, str, str] | None = None


@dataclass
class _RawConnection:
    junction_id: str
    incoming: str
    connecting: str
    contact_point: str
    lane_links: list[tuple[int, int]] = field(default_factory=list)


def _parse_geometry(road_el: ET.Element, rid: str) -> ReferenceLine:
    segments = []
    plan_view = road_el.find("planView")
    if plan_view is None:
        raise ParseError(f"road {rid}: missing planView")
    for geom in plan_view.findall("geometry"):
        x = float(geom.get("x", "0"))
        y = float(geom.get("y", "0"))
        hdg = float(geom.get("hdg", "0"))
        length = float(geom.get("length", "0"))
        if length <= 0:
            raise ParseError(f"road {rid}: geometry with non-positive length")
        child = None
        for c in geom:
            child = c
            break
        if child is None or child.tag == "line":
            segments.append(RefSegment("line", x, y, hdg, length))
        elif child.tag == "arc":
            curvature = float(child.get("curvature", "0"))
            if curvature == 0.0:
                segments.append(RefSegment("line", x, y, hdg, length))
            else:
                segments.append(RefSegment("arc", x, y, hdg, length, curvature))
        else:
            raise ParseError(
                f"road {rid}: unsupported geometry kind {child.tag!r} (only line and arc)"
            )
    if not segments:
        raise ParseError(f"road {rid}: planView has no geometry")
    return ReferenceLine(tuple(segments))


def _parse_side_lanes(section: ET.Element, side: str, rid: str) -> list[Lane]:
    holder = section.find(side)
    if holder is None:
        return []
    lanes = []
    for lane_el in holder.findall("lane"):
        lane_id = int(lane_el.get("id", "0"))
        kind = lane_el.get("type", "driving")
        if kind not in _LANE_KINDS:
            # none/border/parking etc. carry no agents; skip quietly.
            continue
        width_el = lane_el.find("width")
        width = float(width_el.get("a", "3.5")) if width_el is not None else 3.5
        if width <= 0:
            raise ParseError(f"road {rid}: lane {lane_id} has non-positive width")
        lanes.append(Lane(lane_id=lane_id, kind=kind, width=width))
    # Innermost (|id| == 1) first: that is the traveller's left.
    lanes.sort(key=lambda l: abs(l.lane_id))
    return lanes


def _parse_signals(road_el: ET.Element) -> set[str]:
    found = set()
    holder = road_el.find("signals")
    if holder is None:
        return found
    for sig in holder.findall("signal"):
        code = (sig.get("type") or "").strip()
        name = (sig.get("name") or "").strip().lower()
        if code in _SIGNAL_TYPE_CODES:
            found.add(_SIGNAL_TYPE_CODES[code])
        elif name in SIGNALS:
            found.add(name)
    return found


def _parse_objects(road_el: ET.Element) -> set[str]:
    found = set()
    holder = road_el.find("objects")
    if holder is None:
        return found
    for obj in holder.findall("object"):
        name = (obj.get("name") or "").strip().lower()
        if is_object(name):
            found.add(name)
    return found


def _parse_link(road_el: ET.Element) -> tuple[tuple | None, tuple | None]:
    link = road_el.find("link")
    successor = predecessor = None
    if link is not None:
        s = link.find("successor")
        if s is not None:
            successor = (s.get("elementType", "road"), s.get("elementId", ""), s.get("contactPoint", "start"))
        p = link.find("predecessor")
        if p is not None:
            predecessor = (p.get("elementType", "road"), p.get("elementId", ""), p.get("contactPoint", "end"))
    return successor, predecessor


def _directed_node_id(rid: str, forward: bool) -> str:
    return rid if forward else rid + REVERSE_SUFFIX


def _exit_heading(raw: _RawRoad, forward: bool) -> float:
    if forward:
        return raw.ref.pose_at(raw.ref.length)[2]
    return wrap_angle(raw.ref.pose_at(0.0)[2] + math.pi)


def _entry_heading(raw: _RawRoad, forward: bool) -> float:
    if forward:
        return raw.ref.pose_at(0.0)[2]
    return wrap_angle(raw.ref.pose_at(raw.ref.length)[2] + math.pi)


def parse_opendrive(
    xml_text: str,
    map_name: str | None = None,
    straight_threshold_deg: float = STRAIGHT_THRESHOLD_DEG,
) -> RoadGraph:
    """Parse an OpenDRIVE document into an immutable RoadGraph.

    Raises ParseError for malformed XML or unsupported geometry, and
    GraphConsistencyError for dangling road/lane references.
    """
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        line, column = exc.position if exc.position else (None, None)
        raise ParseError(f"malformed XML: {exc.msg if hasattr(exc, 'msg') else exc}", line, column) from exc

    header = root.find("header")
    if map_name is None:
        map_name = (header.get("name") if header is not None else None) or "unnamed"

    raw_roads: dict[str, _RawRoad] = {}
    for road_el in root.findall("road"):
        rid = road_el.get("id")
        if rid is None:
            raise ParseError("road element without id")
        length = float(road_el.get("length", "0"))
        ref = _parse_geometry(road_el, rid)
        if length <= 0:
            length = ref.length
        section = road_el.find("lanes/laneSection")
        if section is None:
            raise ParseError(f"road {rid}: missing laneSection")
        successor, predecessor = _parse_link(road_el)
        raw_roads[rid] = _RawRoad(
            rid=rid,
            length=length,
            ref=ref,
            right_lanes=_parse_side_lanes(section, "right", rid),
            left_lanes=_parse_side_lanes(section, "left", rid),
            signals=_parse_signals(road_el),
            objects=_parse_objects(road_el),
            successor=successor,
            predecessor=predecessor,
        )

    junction_connections: dict[str, list[_RawConnection]] = {}
    for junc_el in root.findall("junction"):
        jid = junc_el.get("id", "")
        for conn_el in junc_el.findall("connection"):
            conn = _RawConnection(
                junction_id=jid,
                incoming=conn_el.get("incomingRoad", ""),
                connecting=conn_el.get("connectingRoad", ""),
                contact_point=conn_el.get("contactPoint", "start"),
                lane_links=[
                    (int(ll.get("from", "0")), int(ll.get("to", "0")))
                    for ll in conn_el.findall("laneLink")
                ],
            )
            junction_connections.setdefault(jid, []).append(conn)

    # Which directed roads terminate at a junction, keyed by directed node id.
    ends_at_junction: dict[str, str] = {}
    for raw in raw_roads.values():
        for link, forward in ((raw.successor, True), (raw.predecessor, False)):
            if link is None:
                continue
            etype, eid, _ = link
            if etype == "junction":
                if eid not in junction_connections:
                    raise GraphConsistencyError(
                        f"road {raw.rid} links to unknown junction {eid}", road_id=raw.rid
                    )
                side_exists = raw.right_lanes if forward else raw.left_lanes
                if side_exists:
                    ends_at_junction[_directed_node_id(raw.rid, forward)] = eid
            elif etype == "road" and eid not in raw_roads:
                raise GraphConsistencyError(
                    f"road {raw.rid} links to unknown road {eid}", road_id=raw.rid
                )

    threshold = math.radians(straight_threshold_deg)
    edges: list[Connection] = []
    node_turns: dict[str, set[str]] = {}

    def _zip_lane_map(from_lanes: list[Lane], to_lanes: list[Lane]) -> tuple[tuple[int, int], ...]:
        return tuple(
            (f.lane_id, t.lane_id)
            for f, t in zip(from_lanes, to_lanes)
            if f.kind == "driving" and t.kind == "driving"
        )

    def _add_edge(from_raw: _RawRoad, from_fwd: bool, to_raw: _RawRoad, to_fwd: bool,
                  lane_map: tuple[tuple[int, int], ...], junction: bool):
        from_id = _directed_node_id(from_raw.rid, from_fwd)
        to_id = _directed_node_id(to_raw.rid, to_fwd)
        delta = wrap_angle(_entry_heading(to_raw, to_fwd) - _exit_heading(from_raw, from_fwd))
        turn = turn_label(delta, threshold)
        edges.append(Connection(from_id=from_id, to_id=to_id, turn=turn, lane_map=lane_map))
        if junction:
            node_turns.setdefault(from_id, set()).add(turn)

    # Plain road-to-road links.
    for raw in raw_roads.values():
        for link, forward in ((raw.successor, True), (raw.predecessor, False)):
            if link is None or link[0] != "road":
                continue
            etype, eid, contact = link
            target = raw_roads[eid]
            to_fwd = contact != "end"
            from_lanes = raw.right_lanes if forward else raw.left_lanes
            to_lanes = target.right_lanes if to_fwd else target.left_lanes
            if not from_lanes or not to_lanes:
                continue
            _add_edge(raw, forward, target, to_fwd, _zip_lane_map(from_lanes, to_lanes), junction=False)

    # Junction connection records.
    for jid, conns in junction_connections.items():
        for conn in conns:
            if conn.incoming not in raw_roads:
                raise GraphConsistencyError(
                    f"junction {jid}: unknown incoming road {conn.incoming}", road_id=conn.incoming
                )
            if conn.connecting not in raw_roads:
                raise GraphConsistencyError(
                    f"junction {jid}: unknown connecting road {conn.connecting}",
                    road_id=conn.connecting,
                )
            incoming = raw_roads[conn.incoming]
            target = raw_roads[conn.connecting]
            to_fwd = conn.contact_point != "end"
            links = conn.lane_links or [(-1, -1 if to_fwd else 1)]
            by_side: dict[bool, list[tuple[int, int]]] = {}
            for lf, lt in links:
                by_side.setdefault(lf < 0, []).append((lf, lt))
            for from_fwd, lane_map in sorted(by_side.items(), reverse=True):
                from_lanes = incoming.right_lanes if from_fwd else incoming.left_lanes
                to_lanes = target.right_lanes if to_fwd else target.left_lanes
                from_ids = {l.lane_id for l in from_lanes}
                to_ids = {l.lane_id for l in to_lanes}
                for lf, lt in lane_map:
                    if lf not in from_ids:
                        raise GraphConsistencyError(
                            f"junction {jid}: laneLink from lane {lf} missing on road {conn.incoming}",
                            road_id=conn.incoming,
                        )
                    if lt not in to_ids:
                        raise GraphConsistencyError(
                            f"junction {jid}: laneLink to lane {lt} missing on road {conn.connecting}",
                            road_id=conn.connecting,
                        )
                _add_edge(incoming, from_fwd, target, to_fwd, tuple(lane_map), junction=True)

    nodes: list[RoadNode] = []
    for raw in raw_roads.values():
        for forward, side_lanes in ((True, raw.right_lanes), (False, raw.left_lanes)):
            if not side_lanes:
                continue
            node_id = _directed_node_id(raw.rid, forward)
            options = frozenset(node_turns.get(node_id, set()))
            nodes.append(
                RoadNode(
                    id=node_id,
                    base_id=raw.rid,
                    length=raw.length,
                    lanes=tuple(side_lanes),
                    signals=frozenset(raw.signals),
                    objects=frozenset(raw.objects),
                    is_junction=bool(options),
                    junction_options=options,
                    ref=DirectedRef(raw.ref, forward),
                )
            )

    node_ids = {n.id for n in nodes}
    edges = [e for e in edges if e.from_id in node_ids and e.to_id in node_ids]
    return RoadGraph.build(map_name, nodes, edges)
