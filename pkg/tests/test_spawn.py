import math
import random

import pytest

from conftest import agent, make_plan
from scenegen.errors import SpawnError
from scenegen.roadgraph import base_road_id
from scenegen.simulator import SimConfig, solve_spawns


def test_ego_alone_spawns_at_midpoint_inner_lane(parade):
    plan = make_plan([agent(is_ego=True, relative_to_ego="none")])
    solution = solve_spawns(parade, "1", plan)
    ego = solution.ego
    assert ego.road_id == "1"
    assert ego.lane_id == -1
    assert ego.s == pytest.approx(50.0)
    x, y, heading = ego.x, ego.y, ego.heading
    assert heading == pytest.approx(math.pi / 2)
    assert x == pytest.approx(1.75)  # centred in the innermost driving lane
    assert y == pytest.approx(50.0)


def test_golden_plan_spawn_layout(ranking_graph, golden_plan):
    solution = solve_spawns(ranking_graph, "1", golden_plan)
    ego = solution.ego
    front_right = solution.by_id("a1")
    left_turn = solution.by_id("a2")
    walker = solution.by_id("a3")

    assert ego.lane_id == -1
    assert front_right.road_id == ego.road_id
    assert front_right.lane_id == -2  # one driving lane to the right
    assert front_right.s == pytest.approx(ego.s + 8.0)
    assert walker.lane_kind == "shoulder"
    assert walker.s == pytest.approx(ego.s)
    # The left-turn agent sits on the left neighbor road, approaching the junction.
    assert base_road_id(left_turn.road_id) == "101"


def test_distance_override_separates_chain(parade):
    plan = make_plan(
        [
            agent(is_ego=True, relative_to_ego="none"),
            agent(relative_to_ego="front", pos_id=1, distance=12.0),
            agent(relative_to_ego="front", pos_id=0, distance=12.0),
        ]
    )
    solution = solve_spawns(parade, "2", plan)
    first = solution.by_id("a2")  # pos_id 0, in front
    second = solution.by_id("a1")
    assert first.s - second.s == pytest.approx(12.0)
    assert second.s - solution.ego.s == pytest.approx(12.0)


def test_pos_id_ordering_on_random_plans(crossroads):
    rng = random.Random(123)
    rank = {"front": 0, "front left": 0, "front right": 0, "back": 2, "back left": 2,
            "back right": 2, "left": 1, "right": 1}
    for trial in range(500):
        specs = []
        n = rng.randint(1, 5)
        for _ in range(n):
            relative = rng.choice(list(rank))
            road_type = rng.choice(["driving", "driving", "driving", "shoulder", "sidewalk"])
            kind = "pedestrian" if road_type != "driving" else "car"
            action = "stop" if kind == "pedestrian" else "go straight"
            specs.append((kind, action, road_type, relative))
        # pos_id is a per-road-kind ordering: front-most ranks first, like the
        # planner emits it.
        agents = [agent(is_ego=True, relative_to_ego="none")]
        by_bucket = {}
        for spec in sorted(specs, key=lambda s: rank[s[3]]):
            pos = by_bucket.get(spec[2], 0)
            by_bucket[spec[2]] = pos + 1
            kind, action, road_type, relative = spec
            agents.append(
                agent(type=kind, action=action, road_type=road_type,
                      relative_to_ego=relative, pos_id=pos)
            )
        plan = make_plan(agents)
        solution = solve_spawns(crossroads, "20", plan, SimConfig(seed=trial))
        lanes = {}
        for spawn in solution.spawns:
            lanes.setdefault((spawn.road_id, spawn.lane_id), []).append(spawn)
        for members in lanes.values():
            ordered = sorted((m for m in members if not m.plan.is_ego), key=lambda m: m.plan.pos_id)
            for a, b in zip(ordered, ordered[1:]):
                if a.plan.pos_id < b.plan.pos_id:
                    assert a.s > b.s, (trial, a.plan, b.plan)


def test_no_two_agents_within_collision_radius(crossroads, golden_plan, ranking_graph):
    for graph, road in ((ranking_graph, "1"), (crossroads, "13")):
        solution = solve_spawns(graph, road, golden_plan)
        spawns = solution.spawns
        for i in range(len(spawns)):
            for j in range(i + 1, len(spawns)):
                d = math.hypot(spawns[i].x - spawns[j].x, spawns[i].y - spawns[j].y)
                assert d >= 1.5


def test_lane_span_too_wide_raises(parade):
    plan = make_plan(
        [
            agent(is_ego=True, relative_to_ego="none"),
            agent(relative_to_ego="left"),
            agent(relative_to_ego="right"),
        ]
    )
    with pytest.raises(SpawnError):
        solve_spawns(parade, "1", plan)  # parade roads have two driving lanes


def test_missing_lane_kind_names_agent(parade):
    plan = make_plan(
        [
            agent(is_ego=True, relative_to_ego="none"),
            agent(type="pedestrian", action="stop", road_type="shoulder", relative_to_ego="right"),
        ]
    )
    with pytest.raises(SpawnError) as err:
        solve_spawns(parade, "1", plan)
    assert err.value.agent_index == 1


def test_turn_without_option_raises(parade):
    plan = make_plan([agent(is_ego=True, action="turn left", relative_to_ego="none")])
    with pytest.raises(SpawnError) as err:
        solve_spawns(parade, "1", plan)
    assert "turn left" in str(err.value)


def test_missing_adjacent_road_raises(parade):
    plan = make_plan(
        [
            agent(is_ego=True, relative_to_ego="none"),
            agent(relative_to_ego="road of left turn"),
        ]
    )
    with pytest.raises(SpawnError):
        solve_spawns(parade, "1", plan)


def test_oncoming_spawns_on_opposite_approach(unprotected_left):
    plan = make_plan(
        [
            agent(is_ego=True, action="turn left", relative_to_ego="none", pos_id=1),
            agent(relative_to_ego="front", action="go straight", pos_id=0),
        ],
        at_junction=True,
    )
    solution = solve_spawns(unprotected_left, "1", plan)
    oncoming = solution.by_id("a1")
    assert oncoming.road_id == "2"
    assert oncoming.oncoming

    # Without a junction scene the same relative stays on the ego road.
    plan_flat = make_plan(
        [
            agent(is_ego=True, action="go straight", relative_to_ego="none", pos_id=1),
            agent(relative_to_ego="front", action="go straight", pos_id=0),
        ]
    )
    solution = solve_spawns(unprotected_left, "1", plan_flat)
    assert solution.by_id("a1").road_id == "1"
