"""Tick-based kinematic engine: car following, turns, lane changes, crossings.

One scene advances single-threaded; decisions for a tick are computed from the
previous tick's snapshot, so agent order never changes the result and
identical inputs replay to identical frame streams.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from ..errors import SpawnError
from ..geometry import junction_curve, obb_overlap, wrap_angle
from ..roadgraph import RoadGraph, RoadNode
from ..schema import AgentPlan, ScenePlan
from .config import SimConfig
from .profiles import footprint, profile_for
from .spawn import AgentSpawn, SpawnSolution, solve_spawns

# Distance a pedestrian strolls before "on the sidewalk" counts as done [m].
WALK_DISTANCE = 20.0
_STOP_SPEED = 0.3
_BLOCK_HOLD_S = 2.0
# Crossing ends this far past the innermost driving lane edge [m].
_CROSS_CLEARANCE = 1.0

_TURN_OF_ACTION = {"turn left": "left", "turn right": "right", "go straight": "straight"}


@dataclass(frozen=True)
class Frame:
    tick: int
    t: float
    agents: tuple[dict, ...]

    def to_json(self) -> dict:
        return {"tick": self.tick, "t": self.t, "agents": [dict(a) for a in self.agents]}


@dataclass(frozen=True)
class Scene:
    frames: tuple[Frame, ...]
    provenance: dict
    outcome: dict  # {"kind": completed|timed_out|collision, "collisions": [[id, id], ...]}
    final_state: tuple[dict, ...]
    graph: RoadGraph = field(compare=False, repr=False, default=None)

    def to_jsonl(self) -> str:
        lines = [
            json.dumps(frame.to_json(), sort_keys=True, separators=(",", ":"))
            for frame in self.frames
        ]
        return "\n".join(lines) + "\n"


class _AgentSim:
    def __init__(self, spawn: AgentSpawn, graph: RoadGraph, config: SimConfig,
                 weather: str, agent_id: str | None = None):
        plan = spawn.plan
        self.id = agent_id or spawn.agent_id
        self.index = spawn.index
        self.plan = plan
        self.type = plan.type
        self.action = plan.action
        self.behavior = plan.behavior
        self.profile = profile_for(plan.type, plan.behavior, weather)
        self.length, self.width = footprint(plan.type)
        self.graph = graph
        self.config = config

        self.phase = "road"  # road | junction
        self.road: RoadNode = graph.node(spawn.road_id)
        self.lane_id = spawn.lane_id
        self.s = spawn.s
        self.speed = 0.0
        self.traveled = 0.0
        self.lat_extra = 0.0
        self.lat_from = 0.0
        self.lat_progress = 0.0
        self.lane_changing = False
        self.transition: dict | None = None
        self.turn_target: str | None = None
        self.block_hold = 0.0
        self.done = False
        self.frozen = False
        self.pose = (spawn.x, spawn.y, spawn.heading)

        self.crossing: dict | None = None
        if plan.action == "cross the road":
            t0 = self.road.lane_center_offset(self.lane_id)
            self.crossing = {"state": "wait", "t": t0, "t1": _CROSS_CLEARANCE}
        if plan.action == "stop":
            self.done = True
        if plan.action in ("change lane to left", "change lane to right"):
            idx = self.road.lane_index(self.lane_id)
            step = -1 if plan.action.endswith("left") else 1
            self.begin_lane_change(self.road.lanes[idx + step].lane_id)
        self._resolve_transition()

    # -- route ---------------------------------------------------------------

    def _resolve_transition(self):
        """Plan the junction crossing at the end of the current road, if any."""
        self.transition = None
        if self.done or self.crossing is not None or self.action == "block the ego":
            return
        if self.turn_target is not None and self.action != "go straight":
            return  # the planned turn already happened
        turn = _TURN_OF_ACTION.get(self.action)
        if turn is None:
            return
        if turn == "straight" and "straight" not in self.road.junction_options:
            return
        conns = [c for c in self.graph.outgoing(self.road.id) if c.turn == turn]
        if not conns:
            return
        conn = conns[0]
        target = self.graph.node(conn.to_id)
        target_lane = None
        for lf, lt in conn.lane_map:
            if lf == self.lane_id:
                target_lane = lt
                break
        if target_lane is None or not any(l.lane_id == target_lane for l in target.lanes):
            if not target.driving_lanes:
                return
            # Keep parallel streams parallel: hold the driving-lane index.
            own_driving = [l.lane_id for l in self.road.driving_lanes]
            idx = own_driving.index(self.lane_id) if self.lane_id in own_driving else 0
            target_lane = target.driving_lanes[min(idx, len(target.driving_lanes) - 1)].lane_id
        exit_pose = self.road.pose_at(self.road.length, self.lane_id)
        entry_pose = target.pose_at(0.0, target_lane)
        curve = junction_curve(exit_pose, entry_pose)
        self.transition = {
            "curve": curve,
            "length": max(curve.arc_length(), 1e-6),
            "progress": 0.0,
            "source": self.road.id,
            "target": target,
            "target_lane": target_lane,
            "turn": conn.turn,
        }

    @property
    def dist_to_end(self) -> float:
        return max(0.0, self.road.length - self.s)

    def begin_lane_change(self, target_lane: int):
        if self.lane_changing or target_lane == self.lane_id:
            return
        self.lat_from = self.road.lane_center_offset(self.lane_id) - self.road.lane_center_offset(
            target_lane
        )
        self.lane_id = target_lane
        self.lat_extra = self.lat_from
        self.lat_progress = 0.0
        self.lane_changing = True
        self._resolve_transition()

    # -- pose ------------------------------------------------------------------

    def compute_pose(self):
        if self.crossing is not None and self.crossing["state"] != "wait":
            x, y, h = self.road.ref.pose_at(self.s, self.crossing["t"])
            return (x, y, wrap_angle(h + math.pi / 2.0))
        if self.phase == "junction":
            tr = self.transition
            u = min(1.0, tr["progress"] / tr["length"])
            x, y = tr["curve"].point_at(u)
            return (x, y, tr["curve"].heading_at(u))
        x, y, h = self.road.pose_at(self.s, self.lane_id, self.lat_extra)
        return (x, y, h)


class _FrozenAgent(_AgentSim):
    """A persisted agent from a previous scene, held at its final pose."""

    def __init__(self, entry: dict, graph: RoadGraph):
        self.id = entry["id"]
        self.index = -1
        self.plan = AgentPlan(
            type=entry["type"],
            is_ego=False,
            action=entry["action"],
            behavior=entry["behavior"],
            pos_id=0,
            road_type=entry["lane_kind"],
            relative_to_ego="front",
        )
        self.type = entry["type"]
        self.action = entry["action"]
        self.behavior = entry["behavior"]
        self.profile = profile_for(entry["type"], entry["behavior"], "clear")
        self.length, self.width = footprint(entry["type"])
        self.graph = graph
        self.config = None
        self.phase = "road"
        self.road = graph.node(entry["road"])
        self.lane_id = entry["lane_id"]
        self.s = entry["s"]
        self.speed = 0.0
        self.traveled = 0.0
        self.lat_extra = 0.0
        self.lat_from = 0.0
        self.lat_progress = 0.0
        self.lane_changing = False
        self.transition = None
        self.turn_target = None
        self.block_hold = 0.0
        self.crossing = None
        self.done = True
        self.frozen = True
        self.pose = (entry["x"], entry["y"], entry["heading"])

    def compute_pose(self):
        return self.pose


class SimState:
    """Mutable world state; ``step`` advances one tick."""

    def __init__(self, graph: RoadGraph, plan: ScenePlan, agents: list[_AgentSim],
                 config: SimConfig, prompt: str = ""):
        self.graph = graph
        self.plan = plan
        self.config = config
        self.prompt = prompt
        self.agents = agents
        self.tick = 0
        self.time = 0.0
        self.collisions: list[tuple[str, str]] = []
        self._ego = next(a for a in agents if a.plan.is_ego)
        for agent in agents:
            agent.pose = agent.compute_pose()

    @property
    def ego(self) -> _AgentSim:
        return self._ego

    def command_lane_change(self, agent_id: str, direction: str):
        """External control hook (used to script the ego in closed-loop tests)."""
        agent = next(a for a in self.agents if a.id == agent_id)
        idx = agent.road.lane_index(agent.lane_id)
        step = -1 if direction == "left" else 1
        target = idx + step
        if 0 <= target < len(agent.road.lanes) and agent.road.lanes[target].kind == "driving":
            agent.begin_lane_change(agent.road.lanes[target].lane_id)

    def all_done(self) -> bool:
        return all(a.done for a in self.agents)

    # -- per-tick logic --------------------------------------------------------

    def _leader(self, agent: _AgentSim):
        """Nearest agent ahead on the same lane or converging route.

        Besides plain same-lane following, agents heading into the same
        (target road, target lane) through a junction queue behind each other,
        measured by remaining distance to the merge point.
        """
        best = None

        def consider(ds: float, other: _AgentSim):
            nonlocal best
            if ds > 0 and (best is None or ds < best[0]):
                best = (ds, other)

        for other in self.agents:
            if other is agent or other.phase != "road":
                continue
            if other.crossing is not None and other.crossing["state"] == "go":
                continue
            if other.road.id != agent.road.id or other.lane_id != agent.lane_id:
                continue
            consider(other.s - agent.s, other)

        tr = agent.transition
        if tr is not None:
            merge = (tr["target"].id, tr["target_lane"])
            if agent.phase == "junction":
                my_rem = tr["length"] - tr["progress"]
            else:
                my_rem = agent.dist_to_end + tr["length"]
            for other in self.agents:
                if other is agent:
                    continue
                if other.crossing is not None and other.crossing["state"] == "go":
                    continue
                otr = other.transition
                if (
                    other.phase == "junction"
                    and otr is not None
                    and (otr["target"].id, otr["target_lane"]) == merge
                ):
                    # Only committed (in-junction) agents count as merge leaders;
                    # waiting ones must not, or mutual yields deadlock.
                    ds = my_rem - (otr["length"] - otr["progress"])
                    if ds > 0.25:
                        consider(ds, other)
                    elif abs(ds) <= 0.25 and other.id < agent.id:
                        consider(0.3, other)  # simultaneous merge, lower id wins
                elif (
                    other.phase == "road"
                    and other.road.id == merge[0]
                    and other.lane_id == merge[1]
                ):
                    consider(my_rem + other.s, other)

        if best is None:
            return None
        ds, other = best
        return (ds - (agent.length + other.length) / 2.0, other.speed)

    def _must_yield(self, agent: _AgentSim) -> bool:
        """Junction right-of-way for non-aggressive drivers.

        Turning agents yield to straight-through traffic and to anyone already
        inside the junction; straight-through agents yield to crossing traffic
        already inside and to straight traffic approaching from their right.
        """
        if agent.behavior == "aggressive" or agent.phase != "road" or agent.frozen:
            return False
        tr = agent.transition
        if tr is None:
            return False
        if agent.dist_to_end > self.config.yield_range:
            return False
        turning = tr["turn"] in ("left", "right")
        ex, ey, eh = agent.road.end_pose()
        for other in self.agents:
            if other is agent:
                continue
            if other.done and (other.frozen or other.speed < _STOP_SPEED):
                continue  # parked agents are obstacles, not right-of-way holders
            if other.phase == "junction":
                ox, oy, oh = other.pose
                if math.hypot(ox - ex, oy - ey) > self.config.junction_radius:
                    continue
                if turning:
                    return True
                if abs(wrap_angle(oh - eh)) > math.radians(30.0):
                    return True  # crossing traffic is mid-junction
                continue
            if other.road.id == agent.road.id:
                continue
            other_straight = (
                other.transition is not None and other.transition["turn"] == "straight"
            ) or other.action == "go straight"
            if not other_straight:
                continue
            nx, ny, nh = other.road.end_pose()
            if math.hypot(nx - ex, ny - ey) > self.config.junction_radius:
                continue
            if other.dist_to_end > self.config.yield_range + 10.0:
                continue
            if turning:
                return True
            if abs(wrap_angle(nh - (eh + math.pi / 2.0))) <= math.radians(30.0):
                return True  # straight traffic from the right goes first
        return False

    def _decide_speed(self, agent: _AgentSim, dt: float) -> float:
        if agent.frozen:
            return 0.0
        profile = agent.profile
        if agent.crossing is not None:
            if agent.crossing["state"] == "wait":
                ex, ey, _ = self._ego.pose
                ax, ay, _ = agent.pose
                if agent is self._ego or math.hypot(ex - ax, ey - ay) <= self.config.trigger_distance:
                    agent.crossing["state"] = "go"
                else:
                    return 0.0
            return self._integrate(agent, profile.target_speed, dt)

        if agent.done and agent.action in ("stop", "block the ego", "on the sidewalk"):
            v_des = 0.0  # parked and walking agents hold position once finished
        else:
            v_des = profile.target_speed  # finished drivers roll on and clear the way

        if not agent.done and agent.action == "block the ego" and agent is not self._ego:
            v_des = self._blocking_speed(agent)

        leader = self._leader(agent)
        if leader is not None:
            gap, lead_speed = leader
            v_safe = lead_speed + (gap - profile.safe_distance) / self.config.tau
            v_des = min(v_des, max(0.0, v_safe))
        if agent.phase == "road":
            if agent.transition is None and agent.crossing is None:
                # No continuation past this road: ease into the end instead of slamming.
                v_des = min(v_des, max(0.0, agent.dist_to_end / self.config.tau))
            if self._must_yield(agent):
                v_des = min(v_des, max(0.0, (agent.dist_to_end - 2.0) / self.config.tau))
        return self._integrate(agent, v_des, dt)

    def _blocking_speed(self, agent: _AgentSim) -> float:
        ego = self._ego
        if ego.phase == "road" and agent.phase == "road" and ego.road.id == agent.road.id:
            if not agent.lane_changing and agent.lane_id != ego.lane_id:
                ego_idx = agent.road.lane_index(ego.lane_id)
                own_idx = agent.road.lane_index(agent.lane_id)
                target = agent.road.lanes[own_idx + (1 if ego_idx > own_idx else -1)]
                if target.kind == "driving":
                    agent.begin_lane_change(target.lane_id)
            gap = agent.s - ego.s - (agent.length + ego.length) / 2.0
            if gap > self.config.block_gap:
                return max(0.0, ego.speed - 1.0)
            if gap < 0.6 * self.config.block_gap:
                return min(agent.profile.target_speed, ego.speed + 1.0)
            return ego.speed
        return min(agent.profile.target_speed, 2.0)

    @staticmethod
    def _integrate(agent: _AgentSim, v_des: float, dt: float) -> float:
        profile = agent.profile
        v = agent.speed
        v_new = min(v_des, v + profile.accel * dt, profile.target_speed)
        return max(v_new, v - profile.brake * dt, 0.0)

    def _advance(self, agent: _AgentSim, v_new: float, dt: float):
        if agent.frozen:
            return
        agent.speed = v_new
        ds = v_new * dt
        if agent.crossing is not None and agent.crossing["state"] == "go":
            agent.crossing["t"] += ds
            if agent.crossing["t"] >= agent.crossing["t1"]:
                agent.crossing["t"] = agent.crossing["t1"]
                agent.done = True
                agent.speed = 0.0
            agent.pose = agent.compute_pose()
            return

        if agent.phase == "junction":
            tr = agent.transition
            tr["progress"] += ds
            agent.traveled += ds
            if tr["progress"] >= tr["length"]:
                overshoot = tr["progress"] - tr["length"]
                agent.road = tr["target"]
                agent.lane_id = tr["target_lane"]
                agent.s = min(overshoot, agent.road.length)
                agent.phase = "road"
                if agent.action in ("turn left", "turn right"):
                    agent.turn_target = agent.road.id
                agent.transition = None
                agent._resolve_transition()
            self._check_completion(agent, dt)
            agent.pose = agent.compute_pose()
            return

        agent.s += ds
        agent.traveled += ds
        if agent.lane_changing:
            agent.lat_progress += ds
            frac = min(1.0, agent.lat_progress / self.config.lane_change_length)
            agent.lat_extra = agent.lat_from * (1.0 - frac)
            if frac >= 1.0:
                agent.lane_changing = False
                agent.lat_extra = 0.0

        if agent.s >= agent.road.length:
            if agent.transition is not None:
                agent.transition["progress"] = agent.s - agent.road.length
                agent.s = agent.road.length
                agent.phase = "junction"
            else:
                agent.s = agent.road.length
                agent.speed = 0.0
                if not agent.done:
                    agent.done = True  # ran out of road for the planned action

        self._check_completion(agent, dt)
        agent.pose = agent.compute_pose()

    def _check_completion(self, agent: _AgentSim, dt: float):
        if agent.done:
            return
        action = agent.action
        if action in ("turn left", "turn right"):
            if (
                agent.phase == "road"
                and agent.turn_target == agent.road.id
                and agent.s >= self.config.turn_entry_completion
            ):
                agent.done = True
        elif action == "go straight":
            if agent.traveled >= self.config.action_distance:
                agent.done = True
        elif action == "on the sidewalk":
            if agent.traveled >= WALK_DISTANCE:
                agent.done = True
        elif action == "block the ego":
            # Blocked means the ego is pinned after it had a moment to try moving.
            if self._ego.speed < _STOP_SPEED and self.time >= 1.0:
                agent.block_hold += dt
                if agent.block_hold >= _BLOCK_HOLD_S:
                    agent.done = True
            else:
                agent.block_hold = 0.0
        elif action in ("change lane to left", "change lane to right"):
            if not agent.lane_changing and agent.lat_progress > 0.0:
                agent.done = True

    def step(self, dt: float | None = None) -> "SimState":
        dt = self.config.dt if dt is None else dt
        if dt <= 0:
            raise ValueError("dt must be positive")
        speeds = [self._decide_speed(agent, dt) for agent in self.agents]
        for agent, v_new in zip(self.agents, speeds):
            self._advance(agent, v_new, dt)
        self.tick += 1
        self.time = round(self.tick * dt, 9)
        self._detect_collisions()
        return self

    def _detect_collisions(self):
        for i in range(len(self.agents)):
            for j in range(i + 1, len(self.agents)):
                a, b = self.agents[i], self.agents[j]
                if a.frozen and b.frozen:
                    continue
                ax, ay, ah = a.pose
                bx, by, bh = b.pose
                if math.hypot(ax - bx, ay - by) > (a.length + b.length):
                    continue
                if obb_overlap((ax, ay, ah, a.length, a.width), (bx, by, bh, b.length, b.width)):
                    pair = tuple(sorted((a.id, b.id)))
                    if pair not in self.collisions:
                        self.collisions.append(pair)

    # -- output ------------------------------------------------------------------

    def frame(self) -> Frame:
        rows = []
        for agent in self.agents:
            x, y, h = agent.pose
            rows.append(
                {
                    "id": agent.id,
                    "type": agent.type,
                    "x": round(x, 3),
                    "y": round(y, 3),
                    "heading": round(h, 4),
                    "speed": round(agent.speed, 3),
                    "action": agent.action,
                    "done": bool(agent.done),
                }
            )
        return Frame(tick=self.tick, t=round(self.time, 3), agents=tuple(rows))

    def final_state(self) -> tuple[dict, ...]:
        rows = []
        for agent in self.agents:
            x, y, h = agent.pose
            if agent.phase == "junction" and agent.transition is not None:
                road_id = agent.transition["target"].id
                lane_id = agent.transition["target_lane"]
                s = 0.0
                lane_kind = "driving"
            else:
                road_id, lane_id, s = agent.road.id, agent.lane_id, agent.s
                lane_kind = agent.road.lane(lane_id).kind
            rows.append(
                {
                    "id": agent.id,
                    "type": agent.type,
                    "is_ego": agent.plan.is_ego,
                    "behavior": agent.behavior,
                    "action": agent.action,
                    "done": bool(agent.done),
                    "road": road_id,
                    "lane_id": lane_id,
                    "lane_kind": lane_kind,
                    "s": s,
                    "x": x,
                    "y": y,
                    "heading": h,
                    "speed": agent.speed,
                }
            )
        return tuple(rows)


def step(state: SimState, dt: float) -> SimState:
    """Advance the world by one tick (in place) and return it."""
    return state.step(dt)


def build_state(
    graph: RoadGraph,
    solution: SpawnSolution,
    plan: ScenePlan,
    config: SimConfig | None = None,
    prompt: str = "",
) -> SimState:
    config = config or SimConfig()
    weather = plan.weather[0]
    agents = [_AgentSim(spawn, graph, config, weather) for spawn in solution.spawns]
    return SimState(graph, plan, agents, config, prompt)


def _run(state: SimState) -> tuple[tuple[Frame, ...], dict]:
    config = state.config
    max_ticks = int(config.timeout_s / config.dt)
    frames = [state.frame()]
    while not state.all_done() and not state.collisions and state.tick < max_ticks:
        state.step()
        frames.append(state.frame())
    if state.collisions:
        outcome = {"kind": "collision", "collisions": [list(p) for p in state.collisions]}
    elif state.all_done():
        outcome = {"kind": "completed", "collisions": []}
    else:
        outcome = {"kind": "timed_out", "collisions": []}
    return tuple(frames), outcome


def render_scene(
    graph: RoadGraph,
    selection,
    plan: ScenePlan,
    config: SimConfig | None = None,
    prompt: str = "",
) -> Scene:
    """Spawn the plan on the selected road and run it to completion."""
    config = config or SimConfig()
    solution = solve_spawns(graph, selection, plan, config)
    state = build_state(graph, solution, plan, config, prompt)
    frames, outcome = _run(state)
    selection_payload = (
        selection.to_json() if hasattr(selection, "to_json") else {"chosen": str(selection)}
    )
    provenance = {
        "prompt": prompt,
        "plan": plan.to_payload(),
        "selection": selection_payload,
        "seed": config.seed,
        "weather": f"{plan.weather[0]} {plan.weather[1]}",
    }
    return Scene(
        frames=frames,
        provenance=provenance,
        outcome=outcome,
        final_state=state.final_state(),
        graph=graph,
    )


def continue_sequence(
    graph: RoadGraph,
    prev: Scene,
    new_plan: ScenePlan,
    config: SimConfig | None = None,
    prompt: str = "",
) -> Scene:
    """Start a new scene from the previous scene's final poses.

    The ego persists and is re-tasked with the new plan's ego action; every
    other previous agent persists frozen at its final pose; non-ego agents in
    the new plan spawn fresh relative to the ego's final pose.
    """
    config = config or SimConfig()
    prev_final = list(prev.final_state)
    ego_prev = next(e for e in prev_final if e["is_ego"])
    anchor = (ego_prev["road"], ego_prev["lane_id"], ego_prev["s"])
    occupied = [
        (e["road"], e["lane_id"], e["s"]) for e in prev_final if not e["is_ego"]
    ]

    solution = solve_spawns(
        graph, anchor[0], new_plan, config, ego_anchor=anchor, occupied=occupied
    )
    weather = new_plan.weather[0]

    agents: list[_AgentSim] = []
    next_index = len(prev_final)
    for entry in prev_final:
        if entry["is_ego"]:
            # Pose carries over exactly; the new event starts from standstill.
            agents.append(_AgentSim(solution.ego, graph, config, weather, agent_id=entry["id"]))
        else:
            agents.append(_FrozenAgent(entry, graph))
    for spawn in solution.spawns:
        if spawn.plan.is_ego:
            continue
        agents.append(_AgentSim(spawn, graph, config, weather, agent_id=f"a{next_index}"))
        next_index += 1

    for i in range(len(agents)):
        for j in range(i + 1, len(agents)):
            a, b = agents[i], agents[j]
            if a.frozen and b.frozen:
                continue
            if math.hypot(a.pose[0] - b.pose[0], a.pose[1] - b.pose[1]) < 1.5:
                raise SpawnError(f"continuation agent {b.id} would spawn on top of {a.id}")

    state = SimState(graph, new_plan, agents, config, prompt)
    # Frame 0 must carry the persisted ego pose byte-exactly.
    state.ego.pose = (ego_prev["x"], ego_prev["y"], ego_prev["heading"])
    frames, outcome = _run(state)
    provenance = {
        "prompt": prompt,
        "plan": new_plan.to_payload(),
        "selection": {"chosen": anchor[0], "continued": True},
        "seed": config.seed,
        "weather": f"{new_plan.weather[0]} {new_plan.weather[1]}",
    }
    return Scene(
        frames=frames,
        provenance=provenance,
        outcome=outcome,
        final_state=state.final_state(),
        graph=graph,
    )
