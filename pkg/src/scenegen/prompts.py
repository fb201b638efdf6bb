"""Prompt protocol shared by every backend.

The system prompt declares the three functionalities and the exact output
format for each; the first line of the user prompt selects the stage. Bump
PROMPT_VERSION whenever the wording changes so replay transcripts stay
comparable.
"""

from __future__ import annotations

from . import vocab

PROMPT_VERSION = 1

STAGE_TAGS = {"analysis": "analysis", "retrieval": "road retrieval", "planning": "planning"}


def _choices(values) -> str:
    return ", ".join(values)


SYSTEM_PROMPT = f"""You are an expert in the city's traffic management system and can easily extract precise information from text, with a strong intuition for space management. The city has a road network represented as a graph database. A graph node represents a road ID, and an edge represents the connection between roads. Each node contains zero or more objects and signals. You have three functionalities:
1. Analyze user input. A user provides a natural description of a traffic scenario, and you extract all relevant information.
2. Provide retrieval conditions for roads. These conditions are used to search for roads and towns suitable for generation.
3. Plan agent behavior. You plan agent behavior based on the selected road condition, input prompt, and predefined rules.

The activation of each functionality is controlled by adding "analysis", "road retrieval", or "planning" at the beginning of the input.

Vocabulary:
- AGENT_TYPE: {_choices(vocab.AGENT_TYPES)}
- ACTION: {_choices(vocab.ACTIONS)}
- AGENT_BEHAVIOR: {_choices(vocab.BEHAVIORS)}
- RELATIVE_POSITION: {_choices(vocab.RELATIVE_POSITIONS)}
- ROAD_TYPE: {_choices(vocab.ROAD_TYPES)}
- SIGNAL: {_choices(vocab.SIGNALS)}
- OBJECT: {_choices(vocab.FIXED_OBJECTS)}, speed sign of <km/h>
- WEATHER: one adjective of {_choices(vocab.WEATHER_ADJECTIVES)} combined with a time of {_choices(vocab.WEATHER_TIMES)}

Output format for "analysis" (a single JSON object):
- objects: list of {{"name": OBJECT, "required": true|false}} mentioned in the description.
- signals: list of {{"name": SIGNAL, "required": true|false}} mentioned in the description.
- agents: list of {{"type": AGENT_TYPE, "road_type": ROAD_TYPE, "action": ACTION}} for every agent in the description.
- unknown: list of signals, objects, or agents mentioned but not in the predefined vocabulary.

Output format for "road retrieval" (a single JSON object):
- number_of_lanes: the minimum number of driving lanes on the road where the ego car initially stays, counting only the ego car's direction.
- required_objects: list of OBJECT that must be present.
- required_signals: list of SIGNAL that must be present.
- without_objects: list of OBJECT that must not appear on the road.
- without_signals: list of SIGNAL that must not appear on the road.

Output format for "planning" (a single JSON object):
- env: {{"weather": WEATHER, "at_junction": true|false}}.
- agents: list of agent objects, each with:
  - type: AGENT_TYPE
  - is_ego: true|false, exactly one agent is the ego car
  - action: ACTION
  - behavior: AGENT_BEHAVIOR
  - pos_id: integer; when two or more agents are on the same road, the agent with the smallest pos_id is in front
  - road_type: ROAD_TYPE
  - relative_to_ego: RELATIVE_POSITION, or none for the ego car
  - distance: optional, meters to the reference agent

Important: The output should not be wrapped in a code block and should strictly follow each output format without other explanations or content."""


COT_INSTRUCTION = (
    "Think step by step: list the agents, constraints, and spatial relations you identified, "
    "then give the JSON object on the final lines."
)


def stage_prompt(
    stage: str, description: str, context_json: str | None = None, cot: bool = False
) -> str:
    """Assemble the user prompt for one stage."""
    parts = [STAGE_TAGS[stage], description]
    if context_json is not None:
        parts.append("scene context:\n" + context_json)
    if cot:
        parts.append(COT_INSTRUCTION)
    return "\n\n".join(parts)


def stage_of_prompt(user_prompt: str) -> str:
    """Recover the stage from a user prompt's activation tag."""
    head = user_prompt.lstrip().splitlines()[0].strip().lower() if user_prompt.strip() else ""
    for stage, tag in STAGE_TAGS.items():
        if head == tag:
            return stage
    raise ValueError(f"user prompt does not start with a stage tag: {head!r}")


def description_of_prompt(user_prompt: str) -> str:
    """Recover the scene description (without tag, context, or diagnostics)."""
    lines = user_prompt.lstrip().splitlines()
    body = "\n".join(lines[1:]).strip()
    for marker in ("scene context:", "The previous response was invalid:", COT_INSTRUCTION):
        idx = body.find(marker)
        if idx >= 0:
            body = body[:idx]
    return body.strip()
