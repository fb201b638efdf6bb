"""Behavior profiles, footprints, and weather effects on dynamics."""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..defaults import PEDESTRIAN_SPEED


@dataclass(frozen=True)
class BehaviorProfile:
    name: str
    target_speed: float  # m/s
    safe_distance: float  # m
    accel: float  # m/s^2
    brake: float  # m/s^2


# Faster behaviors keep shorter safe distances; these are engine constants,
# not calibrated values.
PROFILES = {
    "cautious": BehaviorProfile("cautious", target_speed=5.0, safe_distance=10.0, accel=2.0, brake=4.5),
    "normal": BehaviorProfile("normal", target_speed=8.0, safe_distance=6.0, accel=2.5, brake=6.0),
    "aggressive": BehaviorProfile("aggressive", target_speed=12.0, safe_distance=3.0, accel=3.5, brake=7.0),
}

# (length, width) in meters, by agent type.
FOOTPRINTS = {
    "car": (4.5, 1.9),
    "police": (4.8, 1.9),
    "ambulance": (5.6, 2.2),
    "firetruck": (8.5, 2.6),
    "bus": (11.0, 2.9),
    "truck": (8.2, 2.5),
    "motorcycle": (2.2, 0.8),
    "cyclist": (1.9, 0.6),
    "pedestrian": (0.6, 0.6),
}

# Rain reduces usable braking.
_BRAKE_MULTIPLIER = {
    "hard rain": 0.6,
    "mid rain": 0.7,
    "soft rain": 0.8,
    "wet": 0.85,
    "wet cloudy": 0.85,
}


def weather_brake_multiplier(adjective: str) -> float:
    return _BRAKE_MULTIPLIER.get(adjective, 1.0)


def profile_for(agent_type: str, behavior: str, weather_adjective: str) -> BehaviorProfile:
    base = PROFILES[behavior]
    if agent_type == "pedestrian":
        base = replace(base, target_speed=PEDESTRIAN_SPEED, accel=PEDESTRIAN_SPEED * 4)
    elif agent_type == "cyclist":
        base = replace(base, target_speed=min(base.target_speed, 6.0))
    multiplier = weather_brake_multiplier(weather_adjective)
    if multiplier != 1.0:
        base = replace(base, brake=base.brake * multiplier)
    return base


def footprint(agent_type: str) -> tuple[float, float]:
    return FOOTPRINTS[agent_type]
