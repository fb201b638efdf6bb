"""Plan-aware road retrieval and ranking.

Retrieval filters roads by the ConditionSet; ranking scores each candidate by
how many plan-derived feasibility checks it satisfies and picks uniformly at
random (seeded) among the top scorers.

The five check families, which are the normative definition of road/agent
matching here:

* ``turn:<t>``            one per distinct maneuver among agents placed on the
                          ego road; the road's junction options must allow it
                          (going straight also passes on roads that do not end
                          at a junction).
* ``lane:<kind>``         the road carries a shoulder/sidewalk lane for every
                          agent that needs one.
* ``adjacent:<side>``     an agent on the "road of left/right turn" needs that
                          neighbor to exist.
* ``adjacent_straight:<side>``  when such an adjacent agent itself turns, its
                          maneuver crosses the junction onto the candidate's
                          straight continuation, so the candidate must have a
                          straight option.
* ``capacity:<k>``        the ego road hosts all k co-located vehicles: enough
                          driving lanes for the lateral spread and enough
                          length for every same-lane chain at the default gap.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .defaults import DEFAULT_GAP
from .errors import NoCandidateError, NotFoundError
from .roadgraph import RoadGraph, RoadNode
from .schema import AgentPlan, ConditionSet, ScenePlan
from .vocab import object_matches

_LEFTISH = ("left", "front left", "back left")
_RIGHTISH = ("right", "front right", "back right")

_TURN_OF_ACTION = {"turn left": "left", "turn right": "right", "go straight": "straight"}


@dataclass(frozen=True)
class CandidateSet:
    roads: tuple[str, ...]
    conditions: ConditionSet


@dataclass(frozen=True)
class RankedSelection:
    scores: dict[str, dict]
    chosen: str
    seed: int

    def to_json(self) -> dict:
        return {
            "scores": {
                road: {"total": entry["total"], "per_check": dict(entry["per_check"])}
                for road, entry in sorted(self.scores.items())
            },
            "chosen": self.chosen,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "RankedSelection":
        return cls(scores=doc["scores"], chosen=doc["chosen"], seed=doc["seed"])


def road_matches(node: RoadNode, conditions: ConditionSet) -> bool:
    """Independent re-check of every retrieval clause for one road."""
    if len(node.driving_lanes) < max(conditions.number_of_lanes, 1):
        return False
    for signal in conditions.required_signals:
        if signal not in node.signals:
            return False
    for signal in conditions.without_signals:
        if signal in node.signals:
            return False
    for obj in conditions.required_objects:
        if not any(object_matches(obj, present) for present in node.objects):
            return False
    for obj in conditions.without_objects:
        if any(object_matches(obj, present) for present in node.objects):
            return False
    return True


def retrieve_candidates(graph: RoadGraph, conditions: ConditionSet) -> CandidateSet:
    """All roads satisfying every condition; raises NoCandidateError when none do."""
    roads = tuple(sorted(rid for rid, node in graph.nodes.items() if road_matches(node, conditions)))
    if not roads:
        raise NoCandidateError(conditions)
    return CandidateSet(roads=roads, conditions=conditions)


def _is_adjacent(agent: AgentPlan) -> bool:
    return agent.relative_to_ego in ("road of left turn", "road of right turn")


def _lateral_offset(relative: str) -> int:
    if relative in _LEFTISH:
        return -1
    if relative in _RIGHTISH:
        return 1
    return 0


def derive_checks(plan: ScenePlan) -> list[tuple[str, object]]:
    """Plan-derived checks as (name, predicate-over-RoadNode) pairs."""
    checks: dict[str, object] = {}
    ego_road_agents = [a for a in plan.agents if not _is_adjacent(a)]
    adjacent_agents = [a for a in plan.agents if _is_adjacent(a)]

    for agent in ego_road_agents:
        turn = _TURN_OF_ACTION.get(agent.action)
        if turn is None:
            continue
        name = f"turn:{turn}"
        if turn == "straight":
            checks[name] = lambda node: (not node.is_junction) or "straight" in node.junction_options
        else:
            checks[name] = lambda node, t=turn: t in node.junction_options

    for agent in ego_road_agents:
        if agent.road_type in ("shoulder", "sidewalk"):
            kind = agent.road_type
            checks[f"lane:{kind}"] = lambda node, k=kind: bool(node.lanes_of_kind(k))

    for agent in adjacent_agents:
        side = "left" if agent.relative_to_ego == "road of left turn" else "right"
        checks[f"adjacent:{side}"] = lambda node, s=side: s in node.junction_options
        if agent.action in ("turn left", "turn right"):
            checks[f"adjacent_straight:{side}"] = lambda node: "straight" in node.junction_options

    vehicles = [a for a in ego_road_agents if a.road_type == "driving"]
    if vehicles:
        offsets = [_lateral_offset(a.relative_to_ego if not a.is_ego else "") for a in vehicles]
        span = max(offsets) - min(offsets) + 1
        chains: dict[int, int] = {}
        for off in offsets:
            chains[off] = chains.get(off, 0) + 1
        deepest = max(chains.values())

        def capacity(node: RoadNode, span=span, deepest=deepest) -> bool:
            return len(node.driving_lanes) >= span and deepest * DEFAULT_GAP <= node.length

        checks[f"capacity:{len(vehicles)}"] = capacity

    return sorted(checks.items())


def score_road(graph: RoadGraph, road: str, plan: ScenePlan) -> dict:
    """Evaluate every plan-derived check against one road."""
    node = graph.node(road)
    per_check = {name: bool(predicate(node)) for name, predicate in derive_checks(plan)}
    return {"total": sum(per_check.values()), "per_check": per_check}


def rank_and_select(
    graph: RoadGraph, candidates: CandidateSet, plan: ScenePlan, seed: int
) -> RankedSelection:
    """Score all candidates and draw uniformly among the argmax set."""
    if not candidates.roads:
        raise NotFoundError("candidate set is empty")
    scores = {road: score_road(graph, road, plan) for road in candidates.roads}
    best = max(entry["total"] for entry in scores.values())
    argmax = sorted(road for road, entry in scores.items() if entry["total"] == best)
    chosen = random.Random(seed).choice(argmax)
    return RankedSelection(scores=scores, chosen=chosen, seed=seed)


def selection_to_bytes(selection: RankedSelection) -> bytes:
    return json.dumps(selection.to_json(), indent=2, sort_keys=True).encode("utf-8")
