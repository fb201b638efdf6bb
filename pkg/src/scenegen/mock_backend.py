"""Deterministic rule-based planner backend for offline runs and CI.

The mock parses a scene description with a small pattern grammar (counts,
agent nouns, "no <signal/object>" lists, relative-position phrases, action
verbs, weather words) and renders the same stage payloads a remote model
would. Output is a pure function of (prompts, seed): the only randomness is a
seeded choice among equally valid vocabulary options.
"""

from __future__ import annotations

import json
import re
import zlib
from dataclasses import dataclass, field

from . import vocab
from .prompts import COT_INSTRUCTION, description_of_prompt, stage_of_prompt

_COUNT_WORDS = {
    "a": 1, "an": 1, "one": 1, "two": 2, "three": 3, "four": 4, "five": 5, "six": 6,
    "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11, "twelve": 12,
}

_COUNT_RE = r"(?:more than )?(?:\d+|" + "|".join(w for w in _COUNT_WORDS if w not in ("a", "an")) + r")"

# (regex, agent type, is_ego); longest/most specific first, matches are masked.
_NOUNS = [
    (r"\bego car\b|\bego vehicle\b|\bego\b", "car", True),
    (r"\bpolice cars?\b|\bpolice\b", "police", False),
    (r"\bfire ?trucks?\b", "firetruck", False),
    (r"\bambulances?\b", "ambulance", False),
    (r"\bbus(?:es)?\b", "bus", False),
    (r"\btrucks?\b", "truck", False),
    (r"\bmotor ?(?:cycles?|bikes?)\b", "motorcycle", False),
    (r"\bcyclists?\b|\bbicycles?\b|\bbikes?\b", "cyclist", False),
    (r"\bpedestrians?\b|\bpeople\b|\bperson\b", "pedestrian", False),
    (r"\bcars?\b|\bvehicles?\b", "car", False),
]

# (regex, relative, road_type, oncoming); ordered, matches are masked.
_POSITIONS = [
    (r"on the right shoulder", "right", "shoulder", False),
    (r"on the left shoulder", "left", "shoulder", False),
    (r"on the shoulder", None, "shoulder", False),
    (r"on the sidewalk|from (?:a|the) sidewalk", None, "sidewalk", False),
    (r"(?:on|in) the (?:front right|right front)(?: of the ego(?: car| vehicle)?)?", "front right", None, False),
    (r"(?:on|in) the (?:front left|left front)(?: of the ego(?: car| vehicle)?)?", "front left", None, False),
    (r"(?:on|in) the back right(?: of the ego(?: car| vehicle)?)?", "back right", None, False),
    (r"(?:on|in) the back left(?: of the ego(?: car| vehicle)?)?", "back left", None, False),
    (r"\bfront right\b|\bright front\b", "front right", None, False),
    (r"\bfront left\b|\bleft front\b", "front left", None, False),
    (r"\bback right\b", "back right", None, False),
    (r"\bback left\b", "back left", None, False),
    (r"from the left road|on the left[ -]turn lane|from the left[ -]turn road", "road of left turn", None, False),
    (r"from the right road|on the right[ -]turn lane|from the right[ -]turn road", "road of right turn", None, False),
    (r"from the opposite straight|from the straight|from the opposite(?: direction)?", "front", None, True),
    (r"in front of the ego(?: car| vehicle)?|right in front of|in front of|in front|ahead of the ego", "front", None, False),
    (r"behind the ego(?: car| vehicle)?|\bbehind\b", "back", None, False),
    (r"on the destination", "front", None, False),
    (r"on the left|to the left", "left", None, False),
    (r"on the right|to the right", "right", None, False),
]

# (regex, action, priority); higher priority wins when several verbs hit one agent.
_ACTIONS = [
    (r"block(?:s|ing|ed)? the ego(?: car| vehicle)?", "block the ego", 6),
    (r"cross(?:ing|es)? the (?:road|street)", "cross the road", 5),
    (r"cuts? off|cutting off|cut-off|swerv\w*", "__cutoff__", 5),
    (r"turn(?:ing|s)? (?:to the )?left", "turn left", 4),
    (r"turn(?:ing|s)? (?:to the )?right", "turn right", 4),
    (r"chang(?:e|es|ing|ed) lanes? to (?:the )?left", "change lane to left", 4),
    (r"chang(?:e|es|ing|ed) lanes? to (?:the )?right", "change lane to right", 4),
    (r"go(?:ing|es)? straight", "go straight", 3),
    (r"stop(?:ping|ped|s)?\b|does not move|not moving|waiting", "stop", 3),
    (r"\bcoming\b|\bapproaching\b|\bdriving\b|\bmoving\b", "go straight", 1),
]

_BEHAVIORS = [
    (r"dangerous(?:ly)?|in a dangerous way|aggressive(?:ly)?|reckless(?:ly)?|suddenly", "aggressive"),
    (r"cautious(?:ly)?|careful(?:ly)?|slowly", "cautious"),
]

_WEATHER_ADJ = [
    (r"hard rain|heavy rain|downpour|storm", "hard rain"),
    (r"soft rain|light rain|drizzle", "soft rain"),
    (r"mid rain|rainy|raining|\brain\b", "mid rain"),
    (r"wet cloudy", "wet cloudy"),
    (r"\bwet\b|puddles?", "wet"),
    (r"cloudy|overcast", "cloudy"),
    (r"clear sky|sunny|\bclear\b", "clear"),
]

_WEATHER_TIME = [
    (r"\bnight\b|midnight", "night"),
    (r"\bsunset\b|\bdusk\b|\bevening\b", "sunset"),
    (r"\bnoon\b|midday|daytime", "noon"),
]

_JUNCTION_RE = re.compile(r"intersection|junction|crossroads?")

_NEGATION_RE = re.compile(r"(?:\bno\b|\bwithout\b|free of) ")

_TEMPLATE_RE = re.compile(r"please create a scene for (.+)")

_CROSSWALK_PHRASE_RE = re.compile(r"\b((?:[a-z]+ ){0,4}crosswalks?)\b")

# Relatives handed to agents that never got one, in order.
_DEFAULT_POOL = (
    "front", "back", "front left", "front right", "back left", "back right",
    "left", "right", "road of left turn", "road of right turn",
)

_FRONT_RANK = {"front": 0, "front left": 0, "front right": 0}
_BACK_RANK = {"back": 2, "back left": 2, "back right": 2}


@dataclass
class _Agent:
    type: str
    is_ego: bool = False
    relative: str | None = None
    road_type: str | None = None
    action: str | None = None
    action_priority: int = 0
    behavior: str | None = None
    oncoming: bool = False

    def set_action(self, action: str, priority: int):
        if action and priority > self.action_priority:
            self.action = action
            self.action_priority = priority


@dataclass
class _Sketch:
    required_signals: set = field(default_factory=set)
    absent_signals: set = field(default_factory=set)
    required_objects: set = field(default_factory=set)
    absent_objects: set = field(default_factory=set)
    unknown: list = field(default_factory=list)
    agents: list = field(default_factory=list)
    at_junction: bool = False
    weather: tuple | None = None


class _DetRng:
    """Tiny xorshift generator so mock choices do not depend on CPython hashing."""

    def __init__(self, state: int):
        self.state = state & 0xFFFFFFFF or 1

    def next(self) -> int:
        x = self.state
        x ^= (x << 13) & 0xFFFFFFFF
        x ^= x >> 17
        x ^= (x << 5) & 0xFFFFFFFF
        self.state = x
        return x

    def choice(self, seq):
        return seq[self.next() % len(seq)]


@dataclass
class _NounRef:
    pos: int
    agents: list
    prepositional: bool
    fresh: bool


def _mask(chars: list, start: int, end: int):
    for i in range(start, end):
        chars[i] = " "


def _parse_count(prefix: str) -> int:
    m = re.search(r"(more than )?(\w+)\s*$", prefix)
    if not m:
        return 1
    word = m.group(2)
    count = _COUNT_WORDS.get(word)
    if count is None and word.isdigit():
        count = int(word)
    if count is None:
        return 1
    return count + 1 if m.group(1) else count


def _match_vocab_item(item: str) -> tuple[str, str] | None:
    """Match one negation-list item against signals, then objects."""
    item = item.strip(" .,")
    item = re.sub(r"^(?:a|an|the|any) ", "", item)
    candidates = [item]
    words = item.split()
    if words and words[-1].endswith("s"):
        candidates.append(" ".join(words[:-1] + [words[-1][:-1]]))
    for cand in candidates:
        if cand in vocab.SIGNALS:
            return ("signal", cand)
        if vocab.is_object(cand):
            return ("object", cand)
    return None


def parse_scene(description: str, seed: int) -> _Sketch:
    """Run the pattern grammar over a scene description."""
    text = description.strip().lower()
    rng = _DetRng(zlib.crc32(f"{seed}:{text}".encode("utf-8")))

    m = _TEMPLATE_RE.search(text)
    if m:
        return _template_sketch(m.group(1).strip(" ."), rng)

    sketch = _Sketch()
    sketch.at_junction = bool(_JUNCTION_RE.search(text))

    for pattern, adjective in _WEATHER_ADJ:
        if re.search(pattern, text):
            time = "noon"
            for tp, tv in _WEATHER_TIME:
                if re.search(tp, text):
                    time = tv
                    break
            sketch.weather = (adjective, time)
            break

    for sentence in re.split(r"[.!?]+", text):
        sentence = sentence.strip()
        if sentence:
            _parse_sentence(sentence, sketch)

    for m in _CROSSWALK_PHRASE_RE.finditer(text):
        words = m.group(1).strip().split()
        stop = {"a", "an", "the", "with", "of", "and", "on", "at", "near", "is", "are"}
        while words and words[0] in stop:
            words.pop(0)
        phrase = " ".join(words)
        if phrase.endswith("s"):
            phrase = phrase[:-1]
        if not vocab.is_object(phrase) and phrase != "crosswalk":
            sketch.unknown.append(phrase)
    if re.search(r"puddles?", text):
        sketch.unknown.append("puddles")

    return sketch


def _parse_sentence(sentence: str, sketch: _Sketch):
    chars = list(sentence)

    # Negated feature lists run from "no"/"without" to the end of the sentence.
    for m in _NEGATION_RE.finditer(sentence):
        tail = sentence[m.end():]
        consumed = 0
        for raw_item in re.split(r", and |, | and ", tail):
            matched = _match_vocab_item(raw_item)
            if matched is None:
                if consumed == 0:
                    break  # this "no" did not introduce a feature list
                if raw_item.strip(" .,"):
                    sketch.unknown.append(raw_item.strip(" .,"))
                continue
            kind, name = matched
            (sketch.absent_signals if kind == "signal" else sketch.absent_objects).add(name)
            consumed += 1
        if consumed:
            _mask(chars, m.start(), len(sentence))

    # Positive mentions of signals/objects outside negated spans.
    masked = "".join(chars)
    for term in sorted(vocab.SIGNALS + vocab.FIXED_OBJECTS, key=len, reverse=True):
        for m in list(re.finditer(re.escape(term) + r"s?\b", masked)):
            if term in vocab.SIGNALS:
                sketch.required_signals.add(term)
            else:
                sketch.required_objects.add(term)
            _mask(chars, m.start(), m.end())
        masked = "".join(chars)
    for m in list(re.finditer(r"speed sign of \d+|speed signs?\b", masked)):
        sketch.required_objects.add(re.sub(r"signs\b", "sign", m.group(0)))
        _mask(chars, m.start(), m.end())
        masked = "".join(chars)

    noun_refs: list[_NounRef] = []

    # "blocked by two cars in front" creates the blockers directly.
    blocked = re.search(
        r"blocked by (" + _COUNT_RE + r"|an?) (cars?|vehicles?|trucks?)( in front)?", masked
    )
    if blocked:
        count = _parse_count(blocked.group(1) + " ")
        noun_type = "truck" if "truck" in blocked.group(2) else "car"
        blockers = [
            _Agent(type=noun_type, relative="front", action="block the ego", action_priority=6)
            for _ in range(count)
        ]
        noun_refs.append(_NounRef(blocked.start(), blockers, False, True))
        _mask(chars, blocked.start(), blocked.end())
        masked = "".join(chars)

    # "<n> cars including the ego car" expands to the ego plus n-1 cars.
    including = re.search(
        r"(" + _COUNT_RE + r") (cars?|vehicles?) including the ego(?: car| vehicle)?", masked
    )
    if including:
        count = _parse_count(including.group(1) + " ")
        expanded = [_Agent(type="car", is_ego=True)]
        expanded += [_Agent(type="car") for _ in range(max(0, count - 1))]
        noun_refs.append(_NounRef(including.start(), expanded, False, True))
        _mask(chars, including.start(), including.end())
        masked = "".join(chars)

    matches: list[tuple[int, str, object]] = []

    for pattern, action, priority in _ACTIONS:
        for m in list(re.finditer(pattern, masked)):
            finite = bool(re.search(r"(?:is|are|was|were)\s+$", masked[: m.start()]))
            matches.append((m.start(), "action", (action, priority, finite)))
            _mask(chars, m.start(), m.end())
        masked = "".join(chars)

    for pattern, relative, road_type, oncoming in _POSITIONS:
        for m in list(re.finditer(pattern, masked)):
            matches.append((m.start(), "position", (relative, road_type, oncoming)))
            _mask(chars, m.start(), m.end())
        masked = "".join(chars)

    for pattern, behavior in _BEHAVIORS:
        for m in list(re.finditer(pattern, masked)):
            matches.append((m.start(), "behavior", behavior))
            _mask(chars, m.start(), m.end())
        masked = "".join(chars)

    both_override = bool(re.search(r"\bboth\b", masked))

    raw_nouns = []  # (pos, type, count, is_ego, definite, prepositional)
    for pattern, agent_type, is_ego in _NOUNS:
        for m in list(re.finditer(pattern, masked)):
            prefix = masked[max(0, m.start() - 18): m.start()]
            count = 1 if is_ego else _parse_count(prefix)
            definite = bool(re.search(r"the\s+$", prefix))
            prepositional = bool(re.search(r"\bof (?:(?:a|an|the)\s+)?(?:\w+\s+){0,2}$", prefix))
            raw_nouns.append((m.start(), agent_type, count, is_ego, definite, prepositional))
            _mask(chars, m.start(), m.end())
        masked = "".join(chars)
    raw_nouns.sort(key=lambda n: n[0])

    if both_override:
        # "Both X and Y are <position>": re-point existing agents at that position.
        listed_types = [n[1] for n in raw_nouns] or None
        relatives = [p[0] for _, kind, p in matches if kind == "position" and p[0]]
        if relatives:
            relative = relatives[-1]
            if listed_types:
                for agent_type in listed_types:
                    for agent in reversed(sketch.agents):
                        if agent.type == agent_type and not agent.is_ego:
                            agent.relative = relative
                            break
            else:
                for agent in [a for a in sketch.agents if not a.is_ego][-2:]:
                    agent.relative = relative
        if raw_nouns and all(n[4] for n in raw_nouns):  # all definite: pure restatement
            return

    for pos, agent_type, count, is_ego, definite, prepositional in raw_nouns:
        if is_ego:
            ego = next((a for a in sketch.agents if a.is_ego), None)
            if ego is None:
                for ref in noun_refs:
                    ego = next((a for a in ref.agents if a.is_ego), ego)
            if ego is not None:
                noun_refs.append(_NounRef(pos, [ego], prepositional, False))
            else:
                noun_refs.append(_NounRef(pos, [_Agent(type="car", is_ego=True)], prepositional, True))
            continue
        if definite and count == 1:
            # "The car in front ..." refines an agent announced earlier whose
            # action is still unset or only weakly implied ("are driving").
            pool_agent = next(
                (a for a in sketch.agents
                 if a.type == agent_type and not a.is_ego
                 and a.action_priority <= 1 and a.relative is None),
                None,
            )
            if pool_agent is not None:
                noun_refs.append(_NounRef(pos, [pool_agent], prepositional, False))
                continue
        noun_refs.append(
            _NounRef(pos, [_Agent(type=agent_type) for _ in range(count)], prepositional, True)
        )

    if not noun_refs:
        return
    noun_refs.sort(key=lambda r: r.pos)

    # Assign each match to the nearest preceding noun. Finite verb phrases skip
    # prepositional nouns, so in "a pedestrian in front of a stopped truck is
    # crossing the road" the crossing binds to the pedestrian, not the truck.
    for pos, kind, payload in sorted(matches, key=lambda m: m[0]):
        target = None
        for ref in noun_refs:
            if ref.pos <= pos:
                if kind == "action" and payload[2] and ref.prepositional:
                    continue
                target = ref
            else:
                break
        if target is None:
            target = noun_refs[0]
        for agent in target.agents:
            if kind == "action":
                agent.set_action(payload[0], payload[1])
            elif kind == "position":
                relative, road_type, oncoming = payload
                if relative is not None and agent.relative is None:
                    agent.relative = relative
                if road_type is not None and agent.road_type is None:
                    agent.road_type = road_type
                if oncoming:
                    agent.oncoming = True
            elif kind == "behavior":
                if agent.behavior is None:
                    agent.behavior = payload

    for ref in noun_refs:
        if ref.fresh:
            sketch.agents.extend(ref.agents)


def _template_sketch(name: str, rng: _DetRng) -> _Sketch:
    sketch = _Sketch()

    def agent(**kw):
        sketch.agents.append(_Agent(**kw))

    if "daily traffic" in name:
        agent(type="car", is_ego=True, action="go straight")
        for relative in ("front", "back", "front right"):
            agent(type="car", relative=relative, action="go straight")
    elif "intersection" in name or "junction" in name:
        sketch.at_junction = True
        agent(type="car", is_ego=True, action="go straight")
        agent(type="car", relative="road of left turn", action="go straight")
        agent(type="car", relative="road of right turn", action="go straight")
    elif "pedestrian" in name:
        agent(type="car", is_ego=True, action="go straight")
        agent(
            type="pedestrian", relative="front right", road_type="sidewalk",
            action="cross the road", behavior="aggressive",
        )
    elif "blocking" in name:
        agent(type="car", is_ego=True, action="go straight")
        agent(type="car", relative="front", action="block the ego")
    elif "cut" in name:
        agent(type="car", is_ego=True, action="go straight")
        agent(
            type="car", relative="front right", action="change lane to left",
            behavior="aggressive",
        )
    elif "2-wheel" in name or "two-wheel" in name or "2 wheel" in name:
        agent(type="motorcycle", is_ego=True, action="go straight")
        agent(type="cyclist", relative="front right", road_type="driving", action="go straight")
        agent(type="motorcycle", relative="back", action="go straight")
    elif "emergency" in name:
        agent(type="car", is_ego=True, action="go straight")
        agent(
            type=rng.choice(("ambulance", "firetruck", "police")),
            relative="front", action="go straight", behavior="aggressive",
        )
    elif "rain" in name or "weather" in name:
        sketch.weather = (rng.choice(("soft rain", "mid rain", "hard rain")),
                          rng.choice(vocab.WEATHER_TIMES))
        agent(type="car", is_ego=True, action="go straight")
        agent(type="car", relative="front", action="go straight")
    else:
        agent(type="car", is_ego=True, action="go straight")
        agent(type="car", relative="front", action="go straight")
    return sketch


# ---------------------------------------------------------------------------
# Stage renderers.


def _default_road_type(agent: _Agent) -> str:
    if agent.road_type:
        return agent.road_type
    return "sidewalk" if agent.type == "pedestrian" else "driving"


def _default_action(agent: _Agent, road_type: str) -> str:
    action = agent.action
    if action == "__cutoff__":
        if agent.is_ego:
            return "go straight"
        side = agent.relative or ""
        return "change lane to left" if "right" in side else "change lane to right"
    if action is None:
        if agent.type == "pedestrian":
            return "on the sidewalk" if road_type == "sidewalk" else "stop"
        return "go straight"
    if agent.type == "pedestrian" and action in vocab.VEHICLE_ONLY_ACTIONS:
        return "cross the road"
    if agent.type not in vocab.WALKER_TYPES and action in vocab.WALKER_ONLY_ACTIONS:
        return "go straight"
    return action


def _finalized_agents(sketch: _Sketch) -> list[_Agent]:
    agents = [
        _Agent(
            type=a.type, is_ego=a.is_ego, relative=a.relative, road_type=a.road_type,
            action=a.action, action_priority=a.action_priority, behavior=a.behavior,
            oncoming=a.oncoming,
        )
        for a in sketch.agents
    ]
    if not any(a.is_ego for a in agents):
        promoted = next(
            (a for a in agents
             if a.type == "car" and a.relative is None and a.action in (None, "go straight")),
            None,
        )
        if promoted is not None:
            promoted.is_ego = True
        else:
            agents.insert(0, _Agent(type="car", is_ego=True))

    pool = list(_DEFAULT_POOL)
    pool_idx = 0
    for a in agents:
        road_type = "driving" if a.is_ego else _default_road_type(a)
        action = _default_action(a, road_type)
        if a.is_ego:
            a.relative = None
            a.oncoming = False
        elif a.relative is None:
            a.relative = pool[pool_idx % len(pool)]
            pool_idx += 1
        a.road_type = road_type
        a.action = action
        a.behavior = a.behavior or "normal"
    return agents


def _plan_at_junction(sketch: _Sketch, agents: list[_Agent]) -> bool:
    if sketch.at_junction:
        return True
    for a in agents:
        if a.action in ("turn left", "turn right") or a.oncoming:
            return True
        if a.relative in ("road of left turn", "road of right turn"):
            return True
    return False


def render_analysis(sketch: _Sketch) -> dict:
    entries = []
    for a in sketch.agents:
        road_type = _default_road_type(a)
        entries.append(
            {"type": a.type, "road_type": road_type, "action": _default_action(a, road_type)}
        )
    return {
        "objects": (
            [{"name": n, "required": True} for n in sorted(sketch.required_objects)]
            + [{"name": n, "required": False} for n in sorted(sketch.absent_objects)]
        ),
        "signals": (
            [{"name": n, "required": True} for n in sorted(sketch.required_signals)]
            + [{"name": n, "required": False} for n in sorted(sketch.absent_signals)]
        ),
        "agents": entries,
        "unknown": list(dict.fromkeys(sketch.unknown)),
    }


def render_conditions(sketch: _Sketch) -> dict:
    agents = _finalized_agents(sketch)
    offsets = {0}
    for a in agents:
        if a.is_ego or a.road_type != "driving":
            continue
        if a.relative in ("left", "front left", "back left"):
            offsets.add(-1)
        elif a.relative in ("right", "front right", "back right"):
            offsets.add(1)
    lanes = max(offsets) - min(offsets) + 1
    if any(a.action in ("change lane to left", "change lane to right") for a in agents):
        lanes = max(lanes, 2)
    return {
        "number_of_lanes": lanes,
        "required_objects": sorted(sketch.required_objects),
        "required_signals": sorted(sketch.required_signals),
        "without_objects": sorted(sketch.absent_objects),
        "without_signals": sorted(sketch.absent_signals),
    }


def render_plan(sketch: _Sketch) -> dict:
    agents = _finalized_agents(sketch)
    at_junction = _plan_at_junction(sketch, agents)
    weather = sketch.weather or ("clear", "noon")

    def bucket(a: _Agent) -> tuple:
        if a.relative == "road of left turn":
            road = "left"
        elif a.relative == "road of right turn":
            road = "right"
        elif a.oncoming:
            road = "opposite"
        else:
            road = "ego"
        return (road, a.road_type)

    def rank(a: _Agent) -> int:
        if a.relative is None:
            return 1
        return _FRONT_RANK.get(a.relative, _BACK_RANK.get(a.relative, 1))

    pos_ids: dict[int, int] = {}
    groups: dict[tuple, list[int]] = {}
    for i, a in enumerate(agents):
        groups.setdefault(bucket(a), []).append(i)
    for members in groups.values():
        ordered = sorted(members, key=lambda i: (rank(agents[i]), i))
        for pos, i in enumerate(ordered):
            pos_ids[i] = pos

    return {
        "env": {"weather": f"{weather[0]} {weather[1]}", "at_junction": at_junction},
        "agents": [
            {
                "type": a.type,
                "is_ego": a.is_ego,
                "action": a.action,
                "behavior": a.behavior,
                "pos_id": pos_ids[i],
                "road_type": a.road_type,
                "relative_to_ego": a.relative if not a.is_ego else "none",
            }
            for i, a in enumerate(agents)
        ],
    }


def _cot_preamble(sketch: _Sketch, stage: str) -> str:
    agents = _finalized_agents(sketch)
    lines = [
        "Reasoning:",
        f"- the description names {len(sketch.agents)} agent(s); the scene needs "
        f"{len(agents)} including the ego car.",
    ]
    for a in agents:
        where = a.relative or "the ego position"
        lines.append(
            f"- a {a.behavior} {a.type} at {where} on a {a.road_type} lane intends to "
            f"{a.action}, so the selected road must allow that maneuver from that position."
        )
    lines.append(
        f"- signals required: {sorted(sketch.required_signals) or 'none'}; "
        f"excluded: {sorted(sketch.absent_signals) or 'none'}."
    )
    lines.append(
        f"- objects required: {sorted(sketch.required_objects) or 'none'}; "
        f"excluded: {sorted(sketch.absent_objects) or 'none'}."
    )
    lines.append(f"- the scene is at a junction: {_plan_at_junction(sketch, agents)}.")
    lines.append(f"- weather: {' '.join(sketch.weather) if sketch.weather else 'clear noon'}.")
    lines.append(
        "I cross-check each agent against the vocabulary, confirm the relative positions are "
        "consistent with the lane layout, verify that every action is in the supported action "
        "set, make sure exactly one agent is the ego car, order agents sharing a road so the "
        "smallest position id is in front, and double-check that required and excluded features "
        f"do not overlap before emitting the final {stage} object in the exact schema."
    )
    return "\n".join(lines)


class MockBackend:
    """Rule-based stand-in for a remote model; pure in (prompts, seed)."""

    def __init__(self, seed: int = 0):
        self.seed = seed

    def complete(self, system_prompt: str, user_prompt: str) -> str:
        del system_prompt
        stage = stage_of_prompt(user_prompt)
        description = description_of_prompt(user_prompt)
        sketch = parse_scene(description, self.seed)
        payload = {
            "analysis": render_analysis,
            "retrieval": render_conditions,
            "planning": render_plan,
        }[stage](sketch)
        body = json.dumps(payload, indent=1)
        if COT_INSTRUCTION in user_prompt:
            return _cot_preamble(sketch, stage) + "\n\n" + body
        return body
