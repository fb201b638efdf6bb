"""Deterministic 2D scene rendering."""

from .config import SimConfig
from .engine import Frame, Scene, SimState, build_state, continue_sequence, render_scene, step
from .profiles import PROFILES, BehaviorProfile, footprint, profile_for, weather_brake_multiplier
from .spawn import AgentSpawn, SpawnSolution, find_opposite_approach, solve_spawns
from .svg import render_svg, snapshot_svg

__all__ = [
    "AgentSpawn",
    "BehaviorProfile",
    "Frame",
    "PROFILES",
    "Scene",
    "SimConfig",
    "SimState",
    "SpawnSolution",
    "build_state",
    "continue_sequence",
    "find_opposite_approach",
    "footprint",
    "profile_for",
    "render_scene",
    "render_svg",
    "snapshot_svg",
    "solve_spawns",
    "step",
    "weather_brake_multiplier",
]
