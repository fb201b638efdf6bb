"""Stage-output schemas, structured validation, and the repair loop.

Three wire schemas cross the backend boundary:

* analysis:  {"objects": [{"name", "required"}], "signals": [...],
              "agents": [{"type", "road_type", "action"}], "unknown": [...]}
* retrieval: {"number_of_lanes", "required_objects", "required_signals",
              "without_objects", "without_signals"}
* planning:  {"env": {"weather", "at_junction"},
              "agents": [{"type", "is_ego", "action", "behavior", "pos_id",
                          "road_type", "relative_to_ego", "distance"?}]}

``validate`` reports *every* violation; ``verify_and_repair`` resubmits the
original prompt plus diagnostics until the backend produces a valid payload
or the retry budget runs out.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import vocab
from .errors import RepairExhaustedError

STAGES = ("analysis", "retrieval", "planning")

DEFAULT_MAX_RETRIES = 3

_BOOL_STRINGS = {"true": True, "false": False, "True": True, "False": False}


@dataclass(frozen=True)
class Diagnostic:
    path: str
    problem: str  # missing_key | unknown_key | bad_type | bad_value | cross_field
    message: str


@dataclass(frozen=True)
class ValidationReport:
    diagnostics: tuple[Diagnostic, ...]

    @property
    def ok(self) -> bool:
        return not self.diagnostics

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "diagnostics": [
                {"path": d.path, "problem": d.problem, "message": d.message}
                for d in self.diagnostics
            ],
        }


def _is_bool(value) -> bool:
    return isinstance(value, bool) or (isinstance(value, str) and value in _BOOL_STRINGS)


def _as_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    return _BOOL_STRINGS[value]


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


class _Collector:
    def __init__(self):
        self.diagnostics: list[Diagnostic] = []

    def add(self, path: str, problem: str, message: str):
        self.diagnostics.append(Diagnostic(path, problem, message))

    def check_keys(self, payload: dict, path: str, required: set, optional: set = frozenset()):
        for key in sorted(required - payload.keys()):
            self.add(f"{path}.{key}" if path != "$" else f"$.{key}", "missing_key", f"missing required key {key!r}")
        for key in sorted(payload.keys() - required - optional):
            self.add(f"{path}.{key}" if path != "$" else f"$.{key}", "unknown_key", f"unexpected key {key!r}")

    def report(self) -> ValidationReport:
        return ValidationReport(tuple(self.diagnostics))


def _check_flagged_list(col: _Collector, payload: dict, key: str, member_check, label: str):
    items = payload.get(key)
    if items is None:
        return
    if not isinstance(items, list):
        col.add(f"$.{key}", "bad_type", f"{key} must be a list")
        return
    for i, item in enumerate(items):
        path = f"$.{key}[{i}]"
        if not isinstance(item, dict):
            col.add(path, "bad_type", "entry must be an object with name and required")
            continue
        col.check_keys(item, path, {"name", "required"})
        name = item.get("name")
        if "name" in item and not (isinstance(name, str) and member_check(name)):
            col.add(f"{path}.name", "bad_value", f"{name!r} is not a known {label}")
        if "required" in item and not _is_bool(item["required"]):
            col.add(f"{path}.required", "bad_type", "required must be a boolean")


def _check_name_list(col: _Collector, payload: dict, key: str, member_check, label: str):
    items = payload.get(key)
    if items is None:
        return
    if not isinstance(items, list):
        col.add(f"$.{key}", "bad_type", f"{key} must be a list")
        return
    for i, item in enumerate(items):
        if not (isinstance(item, str) and member_check(item)):
            col.add(f"$.{key}[{i}]", "bad_value", f"{item!r} is not a known {label}")


def _is_signal(name: str) -> bool:
    return name in vocab.SIGNALS


def _validate_analysis(payload: dict, col: _Collector):
    col.check_keys(payload, "$", {"objects", "signals", "agents", "unknown"})
    _check_flagged_list(col, payload, "objects", vocab.is_object, "object")
    _check_flagged_list(col, payload, "signals", _is_signal, "signal")
    agents = payload.get("agents")
    if agents is not None:
        if not isinstance(agents, list):
            col.add("$.agents", "bad_type", "agents must be a list")
        else:
            for i, agent in enumerate(agents):
                path = f"$.agents[{i}]"
                if not isinstance(agent, dict):
                    col.add(path, "bad_type", "agent must be an object")
                    continue
                col.check_keys(agent, path, {"type", "road_type", "action"})
                _check_enum(col, agent, path, "type", vocab.AGENT_TYPES, "agent type")
                _check_enum(col, agent, path, "road_type", vocab.ROAD_TYPES, "road type")
                _check_enum(col, agent, path, "action", vocab.ACTIONS, "action")
    unknown = payload.get("unknown")
    if unknown is not None:
        if not isinstance(unknown, list):
            col.add("$.unknown", "bad_type", "unknown must be a list")
        else:
            for i, item in enumerate(unknown):
                if not isinstance(item, str):
                    col.add(f"$.unknown[{i}]", "bad_type", "unknown entries must be strings")


def _check_enum(col: _Collector, obj: dict, path: str, key: str, allowed, label: str):
    if key not in obj:
        return
    value = obj[key]
    if not isinstance(value, str) or value not in allowed:
        col.add(f"{path}.{key}", "bad_value", f"{value!r} is not a valid {label}")


def _validate_retrieval(payload: dict, col: _Collector):
    col.check_keys(
        payload,
        "$",
        {"number_of_lanes", "required_objects", "required_signals", "without_objects", "without_signals"},
    )
    lanes = payload.get("number_of_lanes")
    if lanes is not None and (not _is_int(lanes) or lanes < 0):
        col.add("$.number_of_lanes", "bad_value", "number_of_lanes must be a non-negative integer")
    _check_name_list(col, payload, "required_objects", vocab.is_object, "object")
    _check_name_list(col, payload, "without_objects", vocab.is_object, "object")
    _check_name_list(col, payload, "required_signals", _is_signal, "signal")
    _check_name_list(col, payload, "without_signals", _is_signal, "signal")
    for kind in ("objects", "signals"):
        req = payload.get(f"required_{kind}")
        wout = payload.get(f"without_{kind}")
        if isinstance(req, list) and isinstance(wout, list):
            overlap = sorted(set(req) & set(wout))
            if overlap:
                col.add(
                    f"$.without_{kind}",
                    "cross_field",
                    f"{overlap} cannot be both required and excluded",
                )


def _validate_planning(payload: dict, col: _Collector):
    col.check_keys(payload, "$", {"env", "agents"})
    env = payload.get("env")
    if env is not None:
        if not isinstance(env, dict):
            col.add("$.env", "bad_type", "env must be an object")
        else:
            col.check_keys(env, "$.env", {"weather", "at_junction"})
            weather = env.get("weather")
            if "weather" in env and not (isinstance(weather, str) and vocab.is_weather(weather)):
                col.add("$.env.weather", "bad_value", f"{weather!r} is not a valid weather condition")
            if "at_junction" in env and not _is_bool(env["at_junction"]):
                col.add("$.env.at_junction", "bad_type", "at_junction must be a boolean")

    agents = payload.get("agents")
    if agents is None:
        return
    if not isinstance(agents, list):
        col.add("$.agents", "bad_type", "agents must be a list")
        return
    ego_indices = []
    for i, agent in enumerate(agents):
        path = f"$.agents[{i}]"
        if not isinstance(agent, dict):
            col.add(path, "bad_type", "agent must be an object")
            continue
        col.check_keys(
            agent,
            path,
            {"type", "is_ego", "action", "behavior", "pos_id", "road_type", "relative_to_ego"},
            optional={"distance"},
        )
        _check_enum(col, agent, path, "type", vocab.AGENT_TYPES, "agent type")
        _check_enum(col, agent, path, "action", vocab.ACTIONS, "action")
        _check_enum(col, agent, path, "behavior", vocab.BEHAVIORS, "behavior")
        _check_enum(col, agent, path, "road_type", vocab.ROAD_TYPES, "road type")
        _check_enum(
            col,
            agent,
            path,
            "relative_to_ego",
            vocab.RELATIVE_POSITIONS + (vocab.RELATIVE_NONE,),
            "relative position",
        )
        if "is_ego" in agent:
            if not _is_bool(agent["is_ego"]):
                col.add(f"{path}.is_ego", "bad_type", "is_ego must be a boolean")
            elif _as_bool(agent["is_ego"]):
                ego_indices.append(i)
        if "pos_id" in agent and not _is_int(agent["pos_id"]):
            col.add(f"{path}.pos_id", "bad_type", "pos_id must be an integer")
        if "distance" in agent:
            dist = agent["distance"]
            if not isinstance(dist, (int, float)) or isinstance(dist, bool) or dist <= 0:
                col.add(f"{path}.distance", "bad_value", "distance must be a positive number")

        agent_type = agent.get("type")
        action = agent.get("action")
        if agent_type == "pedestrian" and action in vocab.VEHICLE_ONLY_ACTIONS:
            col.add(f"{path}.action", "bad_value", f"pedestrians cannot {action}")
        if (
            isinstance(agent_type, str)
            and agent_type in vocab.AGENT_TYPES
            and agent_type not in vocab.WALKER_TYPES
            and action in vocab.WALKER_ONLY_ACTIONS
        ):
            col.add(f"{path}.action", "bad_value", f"a {agent_type} cannot {action}")

    if len(ego_indices) != 1:
        col.add("$.agents", "cross_field", f"exactly one ego required, found {len(ego_indices)}")
    else:
        ego = agents[ego_indices[0]]
        if isinstance(ego, dict) and ego.get("relative_to_ego") not in (None, vocab.RELATIVE_NONE):
            col.add(
                f"$.agents[{ego_indices[0]}].relative_to_ego",
                "cross_field",
                "the ego agent's relative position must be 'none'",
            )
        for i, agent in enumerate(agents):
            if (
                i not in ego_indices
                and isinstance(agent, dict)
                and agent.get("relative_to_ego") == vocab.RELATIVE_NONE
            ):
                col.add(
                    f"$.agents[{i}].relative_to_ego",
                    "cross_field",
                    "'none' is reserved for the ego agent",
                )


def validate(stage: str, payload) -> ValidationReport:
    """Validate a parsed stage payload; lists every violation found."""
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}")
    col = _Collector()
    if not isinstance(payload, dict):
        col.add("$", "bad_type", "payload must be a JSON object")
        return col.report()
    {"analysis": _validate_analysis, "retrieval": _validate_retrieval, "planning": _validate_planning}[
        stage
    ](payload, col)
    return col.report()


def canonicalize(stage: str, payload):
    """Normalize accepted spellings (string booleans) into canonical JSON types."""
    if not isinstance(payload, dict):
        return payload

    def fix_bool(obj: dict, key: str):
        if key in obj and isinstance(obj[key], str) and obj[key] in _BOOL_STRINGS:
            obj[key] = _BOOL_STRINGS[obj[key]]

    if stage == "analysis":
        for key in ("objects", "signals"):
            for item in payload.get(key) or []:
                if isinstance(item, dict):
                    fix_bool(item, "required")
    elif stage == "planning":
        env = payload.get("env")
        if isinstance(env, dict):
            fix_bool(env, "at_junction")
        for agent in payload.get("agents") or []:
            if isinstance(agent, dict):
                fix_bool(agent, "is_ego")
    return payload


def extract_json(text: str) -> dict:
    """Pull the last complete top-level JSON object out of backend text.

    Backends in reasoning modes emit prose before the payload; only the final
    object counts.
    """
    candidates = []
    depth = 0
    start = None
    in_string = False
    escape = False
    for i, ch in enumerate(text):
        if in_string:
            if escape:
                escape = False
            elif ch == "\\":
                escape = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "}":
            if depth > 0:
                depth -= 1
                if depth == 0 and start is not None:
                    candidates.append(text[start : i + 1])
    for chunk in reversed(candidates):
        try:
            doc = json.loads(chunk)
        except json.JSONDecodeError:
            continue
        if isinstance(doc, dict):
            return doc
    raise ValueError("no JSON object found in backend response")


def format_diagnostics(report: ValidationReport) -> str:
    lines = ["The previous response was invalid:"]
    for d in report.diagnostics:
        lines.append(f"- {d.path}: [{d.problem}] {d.message}")
    lines.append("Respond again following the output format exactly.")
    return "\n".join(lines)


@dataclass(frozen=True)
class RepairResult:
    payload: dict
    attempts: int
    report: ValidationReport


def verify_and_repair(
    stage: str,
    prompt: str,
    backend,
    max_retries: int = DEFAULT_MAX_RETRIES,
    system_prompt: str = "",
) -> RepairResult:
    """Call the backend until it produces a schema-valid payload.

    Every retry resubmits the original prompt with the serialized diagnostics
    appended; at most ``max_retries + 1`` backend calls are made.
    """
    if max_retries < 0:
        raise ValueError("max_retries must be >= 0")
    report = ValidationReport(())
    user_prompt = prompt
    attempts = 0
    for _ in range(max_retries + 1):
        attempts += 1
        text = backend.complete(system_prompt, user_prompt)
        try:
            payload = canonicalize(stage, extract_json(text))
        except ValueError as exc:
            report = ValidationReport((Diagnostic("$", "bad_type", str(exc)),))
        else:
            report = validate(stage, payload)
            if report.ok:
                return RepairResult(payload=payload, attempts=attempts, report=report)
        user_prompt = prompt + "\n\n" + format_diagnostics(report)
    raise RepairExhaustedError(report, attempts)


# ---------------------------------------------------------------------------
# Typed views over validated payloads.


@dataclass(frozen=True)
class AnalysisContext:
    objects: tuple[tuple[str, bool], ...]
    signals: tuple[tuple[str, bool], ...]
    agents: tuple[dict, ...]
    unknown: tuple[str, ...]

    @classmethod
    def from_payload(cls, payload: dict) -> "AnalysisContext":
        return cls(
            objects=tuple((o["name"], bool(o["required"])) for o in payload["objects"]),
            signals=tuple((s["name"], bool(s["required"])) for s in payload["signals"]),
            agents=tuple(dict(a) for a in payload["agents"]),
            unknown=tuple(payload["unknown"]),
        )

    def to_payload(self) -> dict:
        return {
            "objects": [{"name": n, "required": r} for n, r in self.objects],
            "signals": [{"name": n, "required": r} for n, r in self.signals],
            "agents": [dict(a) for a in self.agents],
            "unknown": list(self.unknown),
        }


@dataclass(frozen=True)
class ConditionSet:
    number_of_lanes: int = 0
    required_objects: tuple[str, ...] = ()
    required_signals: tuple[str, ...] = ()
    without_objects: tuple[str, ...] = ()
    without_signals: tuple[str, ...] = ()

    @classmethod
    def from_payload(cls, payload: dict) -> "ConditionSet":
        return cls(
            number_of_lanes=payload["number_of_lanes"],
            required_objects=tuple(payload["required_objects"]),
            required_signals=tuple(payload["required_signals"]),
            without_objects=tuple(payload["without_objects"]),
            without_signals=tuple(payload["without_signals"]),
        )

    def to_payload(self) -> dict:
        return {
            "number_of_lanes": self.number_of_lanes,
            "required_objects": list(self.required_objects),
            "required_signals": list(self.required_signals),
            "without_objects": list(self.without_objects),
            "without_signals": list(self.without_signals),
        }


@dataclass(frozen=True)
class AgentPlan:
    type: str
    is_ego: bool
    action: str
    behavior: str
    pos_id: int
    road_type: str
    relative_to_ego: str
    distance: float | None = None

    @classmethod
    def from_payload(cls, payload: dict) -> "AgentPlan":
        return cls(
            type=payload["type"],
            is_ego=bool(payload["is_ego"]),
            action=payload["action"],
            behavior=payload["behavior"],
            pos_id=payload["pos_id"],
            road_type=payload["road_type"],
            relative_to_ego=payload["relative_to_ego"],
            distance=payload.get("distance"),
        )

    def to_payload(self) -> dict:
        doc = {
            "type": self.type,
            "is_ego": self.is_ego,
            "action": self.action,
            "behavior": self.behavior,
            "pos_id": self.pos_id,
            "road_type": self.road_type,
            "relative_to_ego": self.relative_to_ego,
        }
        if self.distance is not None:
            doc["distance"] = self.distance
        return doc


@dataclass(frozen=True)
class ScenePlan:
    weather: tuple[str, str]
    at_junction: bool
    agents: tuple[AgentPlan, ...] = field(default_factory=tuple)

    @classmethod
    def from_payload(cls, payload: dict) -> "ScenePlan":
        env = payload["env"]
        return cls(
            weather=vocab.parse_weather(env["weather"]),
            at_junction=bool(env["at_junction"]),
            agents=tuple(AgentPlan.from_payload(a) for a in payload["agents"]),
        )

    def to_payload(self) -> dict:
        return {
            "env": {"weather": f"{self.weather[0]} {self.weather[1]}", "at_junction": self.at_junction},
            "agents": [a.to_payload() for a in self.agents],
        }

    @property
    def ego(self) -> AgentPlan:
        for agent in self.agents:
            if agent.is_ego:
                return agent
        raise ValueError("plan has no ego agent")

    @property
    def ego_index(self) -> int:
        for i, agent in enumerate(self.agents):
            if agent.is_ego:
                return i
        raise ValueError("plan has no ego agent")
