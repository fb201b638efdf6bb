"""Spawn solving: relative positions and pos_id ordering into concrete poses.

Placement rules:

* The ego takes the leftmost driving-lane window that fits every lateral
  offset implied by the plan; lateral relatives shift one lane.
* front/back shift along the travel direction by the agent's distance (or the
  shared default gap); same-lane chains are ordered so the smallest pos_id
  ends up furthest along the road.
* "road of left/right turn" agents go to the connected neighbor road. When
  the neighbor's opposite-direction twin exists and ends at the junction, the
  agent is placed there approaching the junction, which is what makes the
  planned cross-junction maneuvers renderable.
* At a junction scene where the ego turns left, a "front" vehicle that drives
  through the junction is treated as oncoming and spawns on the opposite
  approach when the map has one.

Plan/geometry conflicts (a turn planned on a road without that option, a
missing lane kind, a road too short for the chain) raise SpawnError instead
of being silently improvised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import SpawnError
from ..geometry import wrap_angle
from ..roadgraph import RoadGraph, RoadNode, neighbors
from ..schema import AgentPlan, ScenePlan
from .config import SimConfig

_LEFTISH = ("left", "front left", "back left")
_RIGHTISH = ("right", "front right", "back right")
_FRONTISH = ("front", "front left", "front right")
_BACKISH = ("back", "back left", "back right")


@dataclass(frozen=True)
class AgentSpawn:
    agent_id: str
    index: int
    plan: AgentPlan
    road_id: str
    lane_id: int
    lane_kind: str
    s: float
    x: float
    y: float
    heading: float
    oncoming: bool = False


@dataclass(frozen=True)
class SpawnSolution:
    road_id: str
    spawns: tuple[AgentSpawn, ...]

    @property
    def ego(self) -> AgentSpawn:
        for spawn in self.spawns:
            if spawn.plan.is_ego:
                return spawn
        raise ValueError("no ego spawn")

    def by_id(self, agent_id: str) -> AgentSpawn:
        for spawn in self.spawns:
            if spawn.agent_id == agent_id:
                return spawn
        raise KeyError(agent_id)


def _lateral_offset(relative: str) -> int:
    if relative in _LEFTISH:
        return -1
    if relative in _RIGHTISH:
        return 1
    return 0


def _frontness(relative: str) -> int:
    if relative in _FRONTISH:
        return 1
    if relative in _BACKISH:
        return -1
    return 0


def _outermost_lane(node: RoadNode, kind: str):
    lanes = node.lanes_of_kind(kind)
    return lanes[-1] if lanes else None


def _is_oncoming(plan: ScenePlan, agent: AgentPlan) -> bool:
    if not plan.at_junction or agent.is_ego:
        return False
    return (
        agent.relative_to_ego == "front"
        and plan.ego.action == "turn left"
        and agent.action in ("turn left", "turn right", "go straight")
    )


def find_opposite_approach(
    graph: RoadGraph, road: RoadNode, junction_radius: float
) -> RoadNode | None:
    """The directed road that meets the same junction head-on, if any."""
    ex, ey, eh = road.end_pose()
    best = None
    best_key = None
    for node in graph.nodes.values():
        if node.id == road.id or node.base_id == road.base_id or not node.driving_lanes:
            continue
        nx, ny, nh = node.end_pose()
        dist = math.hypot(nx - ex, ny - ey)
        if dist > junction_radius:
            continue
        if abs(wrap_angle(nh - (eh + math.pi))) > math.radians(45.0):
            continue
        key = (round(dist, 3), node.id)
        if best_key is None or key < best_key:
            best, best_key = node, key
    return best


def _validate_action_geometry(node: RoadNode, agent: AgentPlan, lane_id: int, index: int):
    if agent.action in ("turn left", "turn right"):
        turn = agent.action.split()[1]
        if turn not in node.junction_options:
            raise SpawnError(
                f"planned {agent.action} but road {node.id} offers "
                f"{sorted(node.junction_options) or 'no turns'}",
                agent_index=index,
            )
    elif agent.action in ("change lane to left", "change lane to right"):
        idx = node.lane_index(lane_id)
        step = -1 if agent.action.endswith("left") else 1
        target = idx + step
        if not (0 <= target < len(node.lanes)) or node.lanes[target].kind != "driving":
            raise SpawnError(
                f"planned {agent.action} but road {node.id} has no driving lane on that side",
                agent_index=index,
            )
    elif agent.action == "on the sidewalk":
        if agent.road_type == "sidewalk" and not node.lanes_of_kind("sidewalk"):
            raise SpawnError(f"road {node.id} has no sidewalk", agent_index=index)


def _stack_from_anchor(members, anchor_s: float, gap: float, direction: int):
    """Chain agents away from the ego: first +/-gap, then spaced by distance.

    Smallest pos_id ends up furthest from the anchor, i.e. spatially in front
    for forward chains and rearmost for backward chains.
    """
    ordered = sorted(members, key=lambda m: (m[1].pos_id, m[0]))
    if direction > 0:
        ordered = list(reversed(ordered))  # nearest to the ego placed first
    placements = []
    s = anchor_s
    for index, agent in ordered:
        s += direction * (agent.distance or gap)
        placements.append((index, agent, s))
    return placements


def _chain_at(members, front_s: float, gap: float):
    """Chain whose front-most member (smallest pos_id) sits exactly at front_s."""
    ordered = sorted(members, key=lambda m: (m[1].pos_id, m[0]))
    placements = []
    s = front_s
    for k, (index, agent) in enumerate(ordered):
        if k > 0:
            s -= agent.distance or gap
        placements.append((index, agent, s))
    return placements


def solve_spawns(
    graph: RoadGraph,
    selection,
    plan: ScenePlan,
    config: SimConfig | None = None,
    ego_anchor: tuple[str, int, float] | None = None,
    occupied: list[tuple[str, int, float]] | None = None,
) -> SpawnSolution:
    """Solve every agent's (road, lane, s, pose) for the chosen road.

    ``selection`` is a RankedSelection or a bare road id. With ``ego_anchor``
    the ego is pinned to an existing (road, lane, s) and everything else is
    placed relative to it, which is how sequential continuations spawn new
    agents around the previous scene's final ego pose. ``occupied`` lists
    (road, lane, s) slots already taken by persisting agents; chains shift
    along their growth direction until clear of them.
    """
    config = config or SimConfig()
    road_id = getattr(selection, "chosen", selection)
    road = graph.node(road_id)
    agents = list(enumerate(plan.agents))
    ego_index = plan.ego_index

    taken: dict[tuple[str, int], list[float]] = {}
    for occ_road, occ_lane, occ_s in occupied or ():
        taken.setdefault((occ_road, occ_lane), []).append(occ_s)

    def clear_of_occupied(chain, target_road: str, lane_id: int, direction: int):
        """Shift a whole chain by gap steps until no member sits on a taken slot."""
        slots = taken.get((target_road, lane_id))
        if not slots:
            return chain
        clearance = config.gap * 0.75
        for _ in range(12):
            if all(abs(s - o) >= clearance for _, _, s in chain for o in slots):
                return chain
            chain = [(i, a, s + direction * config.gap) for i, a, s in chain]
        raise SpawnError(f"no free slot on road {target_road} lane {lane_id}")

    ego_road = graph.node(ego_anchor[0]) if ego_anchor is not None else road

    # Partition agents by the road they will occupy.
    oncoming = [(i, a) for i, a in agents if not a.is_ego and _is_oncoming(plan, a)]
    opposite = None
    if oncoming:
        opposite = find_opposite_approach(graph, ego_road, config.junction_radius)
        if opposite is None:
            oncoming = []  # no head-on approach on this map; keep them on the ego road
    oncoming_ids = {i for i, _ in oncoming}
    adjacent = [
        (i, a)
        for i, a in agents
        if not a.is_ego
        and i not in oncoming_ids
        and a.relative_to_ego in ("road of left turn", "road of right turn")
    ]
    adjacent_ids = {i for i, _ in adjacent}
    local = [(i, a) for i, a in agents if i not in oncoming_ids and i not in adjacent_ids]

    # Ego lane: leftmost driving-lane window that fits all lateral offsets.
    driving = ego_road.driving_lanes
    if not driving:
        raise SpawnError(f"road {ego_road.id} has no driving lane", agent_index=ego_index)
    offsets = {0}
    for i, a in local:
        if not a.is_ego and a.road_type == "driving":
            offsets.add(_lateral_offset(a.relative_to_ego))
    span_lo, span_hi = min(offsets), max(offsets)

    if ego_anchor is not None:
        ego_lane_id = ego_anchor[1]
        ego_lane_idx = next((k for k, l in enumerate(driving) if l.lane_id == ego_lane_id), 0)
        ego_lane_id = driving[ego_lane_idx].lane_id
    else:
        ego_lane_idx = None
        for k in range(len(driving)):
            if k + span_lo >= 0 and k + span_hi <= len(driving) - 1:
                ego_lane_idx = k
                break
        if ego_lane_idx is None:
            raise SpawnError(
                f"plan spans {span_hi - span_lo + 1} driving lanes but road "
                f"{ego_road.id} has {len(driving)}"
            )
        ego_lane_id = driving[ego_lane_idx].lane_id

    # Resolve each local agent's lane.
    lane_of: dict[int, int] = {ego_index: ego_lane_id}
    kind_of: dict[int, str] = {ego_index: "driving"}
    for i, a in local:
        if a.is_ego:
            continue
        if a.road_type in ("shoulder", "sidewalk"):
            lane = _outermost_lane(ego_road, a.road_type)
            if lane is None:
                raise SpawnError(f"road {ego_road.id} has no {a.road_type} lane", agent_index=i)
            lane_of[i] = lane.lane_id
            kind_of[i] = a.road_type
        else:
            idx = ego_lane_idx + _lateral_offset(a.relative_to_ego)
            if not (0 <= idx < len(driving)):
                raise SpawnError(
                    f"no driving lane at offset {_lateral_offset(a.relative_to_ego)} "
                    f"from the ego lane on road {ego_road.id}",
                    agent_index=i,
                )
            lane_of[i] = driving[idx].lane_id
            kind_of[i] = "driving"

    # Longitudinal extents per lane, to position the ego with room to spare.
    # Lateral (same-s) groups hang just below the ego; back chains start below
    # whatever the lateral group already occupies on that lane.
    groups: dict[tuple[int, int], list[tuple[int, AgentPlan]]] = {}
    for i, a in local:
        if a.is_ego:
            continue
        groups.setdefault((lane_of[i], _frontness(a.relative_to_ego)), []).append((i, a))

    def _total(members) -> float:
        return sum((a.distance or config.gap) for _, a in members)

    lateral_depth: dict[int, float] = {}
    for (lane_id, frontness), members in groups.items():
        if frontness == 0:
            depth = _total(members) - min((a.distance or config.gap) for _, a in members)
            if lane_id == ego_lane_id:
                depth += config.gap
            lateral_depth[lane_id] = depth
    max_front = max((_total(m) for (l, f), m in groups.items() if f > 0), default=0.0)
    max_back = 0.0
    for lane_id in {l for (l, _f) in groups}:
        back_total = sum(_total(m) for (l, f), m in groups.items() if l == lane_id and f < 0)
        max_back = max(max_back, lateral_depth.get(lane_id, 0.0) + back_total)

    margin = config.spawn_margin
    if ego_anchor is not None:
        s_ego = ego_anchor[2]
    else:
        lo = margin + max_back
        hi = ego_road.length - margin - max_front
        if lo > hi:
            raise SpawnError(
                f"road {ego_road.id} ({ego_road.length:.0f} m) is too short for the plan"
            )
        s_ego = min(max(ego_road.length / 2.0, lo), hi)

    placements: dict[int, tuple[str, int, str, float]] = {
        ego_index: (ego_road.id, ego_lane_id, "driving", s_ego)
    }

    lane_floor: dict[int, float] = {}

    def _place(chain, lane_id, direction):
        chain = clear_of_occupied(chain, ego_road.id, lane_id, direction)
        for i, a, s in chain:
            if not (0.0 <= s <= ego_road.length):
                raise SpawnError(f"agent falls off road {ego_road.id} at s={s:.1f}", agent_index=i)
            placements[i] = (ego_road.id, lane_id, kind_of[i], s)
            lane_floor[lane_id] = min(lane_floor.get(lane_id, s_ego), s)

    for (lane_id, frontness), members in sorted(groups.items(), key=lambda kv: -kv[0][1]):
        if frontness > 0:
            _place(_stack_from_anchor(members, s_ego, config.gap, 1), lane_id, 1)
        elif frontness == 0:
            front_s = s_ego - config.gap if lane_id == ego_lane_id else s_ego
            _place(_chain_at(members, front_s, config.gap), lane_id, -1)
        else:
            anchor = lane_floor.get(lane_id, s_ego)
            _place(_stack_from_anchor(members, anchor, config.gap, -1), lane_id, -1)

    # Adjacent-road agents.
    for side, side_name in (("left", "road of left turn"), ("right", "road of right turn")):
        members = [(i, a) for i, a in adjacent if a.relative_to_ego == side_name]
        if not members:
            continue
        reached = neighbors(graph, road.id, side)
        if not reached:
            raise SpawnError(
                f"plan needs a road of {side} turn but road {road.id} has none",
                agent_index=members[0][0],
            )
        neighbor = reached[0]
        twin = graph.reverse_twin(neighbor.id)
        approach = None
        if twin is not None and twin.driving_lanes:
            tx, ty, _ = twin.end_pose()
            ex, ey, _ = road.end_pose()
            if math.hypot(tx - ex, ty - ey) <= config.junction_radius:
                approach = twin
        target = approach if approach is not None else neighbor
        for i, a in members:
            if a.road_type in ("shoulder", "sidewalk"):
                lane = _outermost_lane(target, a.road_type)
                if lane is None:
                    raise SpawnError(f"road {target.id} has no {a.road_type} lane", agent_index=i)
            else:
                if not target.driving_lanes:
                    raise SpawnError(f"road {target.id} has no driving lane", agent_index=i)
                lane = target.driving_lanes[0]
            kind_of[i] = lane.kind
            lane_of[i] = lane.lane_id
        if approach is not None:
            front_s = target.length - config.approach_offset
        else:
            front_s = config.approach_offset + (len(members) - 1) * config.gap
        chain = _chain_at(members, front_s, config.gap)
        for i, a, s in clear_of_occupied(chain, target.id, lane_of[members[0][0]], -1):
            if not (margin <= s <= target.length - margin):
                raise SpawnError(f"agent falls off road {target.id} at s={s:.1f}", agent_index=i)
            placements[i] = (target.id, lane_of[i], kind_of[i], s)

    # Oncoming agents on the opposite approach.
    if oncoming:
        assert opposite is not None
        lane = opposite.driving_lanes[0]
        front_s = opposite.length - config.approach_offset
        chain = _chain_at(oncoming, front_s, config.gap)
        for i, a, s in clear_of_occupied(chain, opposite.id, lane.lane_id, -1):
            if not (margin <= s <= opposite.length - margin):
                raise SpawnError(f"agent falls off road {opposite.id} at s={s:.1f}", agent_index=i)
            placements[i] = (opposite.id, lane.lane_id, "driving", s)
            kind_of[i] = "driving"

    spawns = []
    for i, agent in agents:
        road_i, lane_i, kind_i, s_i = placements[i]
        node = graph.node(road_i)
        _validate_action_geometry(node, agent, lane_i, i)
        x, y, heading = node.pose_at(s_i, lane_i)
        spawns.append(
            AgentSpawn(
                agent_id=f"a{i}",
                index=i,
                plan=agent,
                road_id=road_i,
                lane_id=lane_i,
                lane_kind=kind_i,
                s=s_i,
                x=x,
                y=y,
                heading=heading,
                oncoming=i in oncoming_ids,
            )
        )

    # pos_id ordering and clearance are structural invariants of the solution.
    by_lane: dict[tuple[str, int], list[AgentSpawn]] = {}
    for spawn in spawns:
        by_lane.setdefault((spawn.road_id, spawn.lane_id), []).append(spawn)
    for members_ in by_lane.values():
        non_ego = sorted(
            (m for m in members_ if not m.plan.is_ego), key=lambda m: m.plan.pos_id
        )
        for a, b in zip(non_ego, non_ego[1:]):
            if a.plan.pos_id < b.plan.pos_id and a.s <= b.s:
                raise SpawnError(
                    f"pos_id ordering cannot be honored on road {a.road_id} lane {a.lane_id}"
                )
    for k in range(len(spawns)):
        for j in range(k + 1, len(spawns)):
            a, b = spawns[k], spawns[j]
            if math.hypot(a.x - b.x, a.y - b.y) < 1.5:
                raise SpawnError(
                    f"agents {a.index} and {b.index} would spawn on top of each other",
                    agent_index=b.index,
                )

    return SpawnSolution(road_id=road.id, spawns=tuple(spawns))
