"""Closed vocabularies for agents, actions, road features, and weather.

Every stage schema validates against these lists; anything outside them in a
scene description must surface in the analysis ``unknown`` list instead of
being silently dropped.
"""

from __future__ import annotations

import re

AGENT_TYPES = (
    "ambulance",
    "police",
    "firetruck",
    "bus",
    "truck",
    "motorcycle",
    "car",
    "pedestrian",
    "cyclist",
)

ACTIONS = (
    "turn left",
    "turn right",
    "go straight",
    "change lane to left",
    "change lane to right",
    "stop",
    "block the ego",
    "cross the road",
    "on the sidewalk",
)

BEHAVIORS = ("cautious", "normal", "aggressive")

RELATIVE_POSITIONS = (
    "front",
    "back",
    "left",
    "right",
    "front left",
    "front right",
    "back left",
    "back right",
    "road of left turn",
    "road of right turn",
)

# Marker used by the ego agent instead of a relative position.
RELATIVE_NONE = "none"

ROAD_TYPES = ("driving", "sidewalk", "shoulder")

SIGNALS = ("traffic light", "stop sign", "yield sign")

# "speed sign" additionally carries a km/h value, e.g. "speed sign of 60".
FIXED_OBJECTS = (
    "simple crosswalk",
    "ladder crosswalk",
    "continental crosswalk",
    "dashed single white crosswalk",
    "solid single white crosswalk",
    "stop line",
    "stop sign on road",
)

SPEED_SIGN = "speed sign"

WEATHER_ADJECTIVES = ("clear", "cloudy", "hard rain", "mid rain", "soft rain", "wet cloudy", "wet")
WEATHER_TIMES = ("night", "noon", "sunset")

# Agent types that may walk across or along pedestrian lanes.
WALKER_TYPES = ("pedestrian", "cyclist")

# Actions only steerable vehicles can perform.
VEHICLE_ONLY_ACTIONS = ("turn left", "turn right", "change lane to left", "change lane to right")

# Actions reserved for walkers.
WALKER_ONLY_ACTIONS = ("cross the road", "on the sidewalk")

TURN_OPTIONS = ("left", "right", "straight")

_SPEED_SIGN_RE = re.compile(r"^speed sign(?: of (\d+))?$")


def parse_object(value: str) -> tuple[str, int | None]:
    """Split an object string into (kind, speed value).

    Raises ValueError if the string is not in the object vocabulary or the
    speed value is not a positive integer.
    """
    if not isinstance(value, str):
        raise ValueError(f"object must be a string, got {type(value).__name__}")
    text = value.strip().lower()
    if text in FIXED_OBJECTS:
        return text, None
    m = _SPEED_SIGN_RE.match(text)
    if m:
        if m.group(1) is None:
            return SPEED_SIGN, None
        speed = int(m.group(1))
        if speed <= 0:
            raise ValueError(f"speed sign value must be positive: {value!r}")
        return SPEED_SIGN, speed
    raise ValueError(f"unknown object: {value!r}")


def is_object(value: str) -> bool:
    try:
        parse_object(value)
        return True
    except ValueError:
        return False


def format_object(kind: str, value: int | None = None) -> str:
    if kind == SPEED_SIGN and value is not None:
        return f"speed sign of {value}"
    return kind


def object_matches(required: str, present: str) -> bool:
    """True when a present object satisfies a required one.

    A bare "speed sign" requirement accepts any posted value; a valued
    requirement needs the exact value.
    """
    rk, rv = parse_object(required)
    pk, pv = parse_object(present)
    if rk != pk:
        return False
    return rv is None or rv == pv


def parse_weather(value: str) -> tuple[str, str]:
    """Parse "<adjective> <time>" into its two parts.

    Adjectives may contain spaces ("hard rain night"), so the match is
    longest-adjective-first. Raises ValueError for anything else.
    """
    if not isinstance(value, str):
        raise ValueError(f"weather must be a string, got {type(value).__name__}")
    text = value.strip().lower()
    for adjective in sorted(WEATHER_ADJECTIVES, key=len, reverse=True):
        if text.startswith(adjective + " "):
            time = text[len(adjective) + 1 :].strip()
            if time in WEATHER_TIMES:
                return adjective, time
    raise ValueError(f"unknown weather: {value!r}")


def is_weather(value: str) -> bool:
    try:
        parse_weather(value)
        return True
    except ValueError:
        return False
