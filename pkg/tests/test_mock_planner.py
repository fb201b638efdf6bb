import json

import pytest

from scenegen.backends import RecordingBackend, ReplayBackend
from scenegen.errors import EmptyPromptError, ReplayError
from scenegen.mock_backend import MockBackend
from scenegen.planner import (
    MODES,
    PromptRequest,
    TokenUsage,
    analyze,
    derive_conditions,
    plan_agents,
    plan_all,
)

GOLDEN_PROMPT = (
    "The ego car is turning right. A car on the front right is also turning right. "
    "Another car on the left-turn lane is turning left. "
    "A pedestrian on the right shoulder is crossing the road."
)


def run(prompt, seed=0, mode="analysis_then_stage"):
    return PromptRequest(text=prompt, mode=mode, seed=seed)


def test_intersection_prompt_analysis():
    context = analyze(
        run("Daily traffic at the intersection with more than ten cars, no traffic lights."),
        MockBackend(0),
    )
    assert ("traffic light", False) in context.signals
    cars = [a for a in context.agents if a["type"] == "car"]
    assert len(cars) >= 10


def test_empty_prompt_rejected_before_backend():
    class Exploding:
        def complete(self, *_):
            raise AssertionError("backend must not be called")

    with pytest.raises(EmptyPromptError):
        analyze(run("   "), Exploding())


def test_pedestrian_crossing_analysis():
    context = analyze(run("A pedestrian is crossing the road"), MockBackend(0))
    assert list(context.agents) == [
        {"type": "pedestrian", "road_type": "sidewalk", "action": "cross the road"}
    ]


def test_no_signal_maps_to_without():
    request = run("The ego car is going straight with no traffic light")
    context = analyze(request, MockBackend(0))
    conditions = derive_conditions(request, context, MockBackend(0))
    assert "traffic light" in conditions.without_signals


def test_negated_feature_list_split():
    request = run(
        "The ego car is turning left at the intersection with no traffic light, "
        "stop sign, and stop sign on road."
    )
    conditions = derive_conditions(request, None, MockBackend(0))
    assert set(conditions.without_signals) >= {"traffic light", "stop sign"}
    assert "stop sign on road" in conditions.without_objects
    assert "stop sign" not in conditions.without_objects


def test_plain_prompt_defaults_to_one_lane():
    conditions = derive_conditions(run("The ego car is going straight"), None, MockBackend(0))
    assert conditions.number_of_lanes == 1
    assert conditions.required_signals == ()
    assert conditions.required_objects == ()
    assert conditions.without_signals == ()
    assert conditions.without_objects == ()


def test_two_blocking_cars_plan():
    plan = plan_agents(run("two cars in front block the ego car"), None, MockBackend(0))
    assert len(plan.agents) == 3
    blockers = [a for a in plan.agents if not a.is_ego]
    assert all(a.type == "car" for a in blockers)
    assert all(a.relative_to_ego == "front" for a in blockers)
    assert all(a.action in ("stop", "block the ego") for a in blockers)
    assert blockers[0].pos_id != blockers[1].pos_id  # one is placed ahead of the other


def test_golden_prompt_reproduces_agent_table():
    plan = plan_agents(run(GOLDEN_PROMPT), None, MockBackend(0))
    rows = [
        (a.type, a.is_ego, a.relative_to_ego, a.action, a.pos_id) for a in plan.agents
    ]
    assert rows == [
        ("car", True, "none", "turn right", 1),
        ("car", False, "front right", "turn right", 0),
        ("car", False, "road of left turn", "turn left", 0),
        ("pedestrian", False, "right", "cross the road", 0),
    ]
    assert plan.agents[3].road_type == "shoulder"
    assert plan.at_junction


def test_single_agent_prompt():
    plan = plan_agents(run("the ego car is going straight"), None, MockBackend(0))
    assert len(plan.agents) == 1
    assert plan.agents[0].is_ego
    assert plan.agents[0].action == "go straight"


def test_weather_and_unknowns():
    request = run(
        "A cyclist is crossing the street from a sidewalk in a dangerous way on a rainy night"
    )
    plan = plan_agents(request, None, MockBackend(0))
    assert plan.weather == ("mid rain", "night")
    cyclist = next(a for a in plan.agents if a.type == "cyclist")
    assert cyclist.action == "cross the road"
    assert cyclist.behavior == "aggressive"

    context = analyze(
        run("A pedestrian is crossing the road with the parallel open crosswalk"), MockBackend(0)
    )
    assert "parallel open crosswalk" in context.unknown

    context = analyze(
        run("The ego car is going straight at the intersection with a traffic light. "
            "There are some puddles on the road"),
        MockBackend(0),
    )
    assert ("traffic light", True) in context.signals
    assert "puddles" in context.unknown


def test_refinement_sentences():
    plan = plan_agents(
        run(
            "Three cars including the ego car are driving. The car in front go straight. "
            "The ego is turning right. The car behind the ego is turning left"
        ),
        None,
        MockBackend(0),
    )
    assert len(plan.agents) == 3
    ego = plan.ego
    assert ego.action == "turn right"
    front = next(a for a in plan.agents if a.relative_to_ego == "front")
    back = next(a for a in plan.agents if a.relative_to_ego == "back")
    assert front.action == "go straight"
    assert back.action == "turn left"


def test_mock_is_deterministic():
    request = run(GOLDEN_PROMPT, seed=3)
    first = plan_all(request, MockBackend(3))
    second = plan_all(request, MockBackend(3))
    assert first[1] == second[1]
    assert first[2] == second[2]


def test_every_plan_has_exactly_one_ego():
    prompts = [
        GOLDEN_PROMPT,
        "A pedestrian is crossing the road",
        "two cars in front block the ego car",
        "Please create a scene for emergency vehicles",
    ]
    for prompt in prompts:
        plan = plan_agents(run(prompt), None, MockBackend(1))
        assert sum(a.is_ego for a in plan.agents) == 1


def test_mode_call_and_token_ordering():
    prompt = "Two cars from the opposite straight is coming when the ego car is turning left"
    usages = {}
    for mode in MODES:
        usage = TokenUsage()
        plan_all(run(prompt, mode=mode), MockBackend(0), usage)
        usages[mode] = usage
    assert usages["direct"].calls == 2
    assert usages["cot"].calls == 2
    assert usages["analysis_then_stage"].calls == 3
    assert usages["analysis_plus_cot"].calls == 3
    ordering = [
        usages["direct"].completion_tokens,
        usages["analysis_then_stage"].completion_tokens,
        usages["cot"].completion_tokens,
        usages["analysis_plus_cot"].completion_tokens,
    ]
    assert ordering == sorted(ordering)
    assert len(set(ordering)) == 4


def test_cot_output_passes_same_validators():
    plan = plan_agents(run(GOLDEN_PROMPT, mode="cot"), None, MockBackend(0))
    base = plan_agents(run(GOLDEN_PROMPT, mode="direct"), None, MockBackend(0))
    assert plan == base  # reasoning preamble changes tokens, not the payload


def test_record_and_replay_transcript(tmp_path):
    path = tmp_path / "transcript.jsonl"
    request = run(GOLDEN_PROMPT, seed=5)
    recorded = plan_all(request, RecordingBackend(MockBackend(5), path))
    lines = [json.loads(l) for l in path.read_text().splitlines()]
    assert [l["stage"] for l in lines] == ["analysis", "retrieval", "planning"]

    replayed = plan_all(request, ReplayBackend(path))
    assert replayed[1] == recorded[1]
    assert replayed[2] == recorded[2]

    with pytest.raises(ReplayError):
        plan_agents(request, None, ReplayBackend(path))  # stage order diverges
