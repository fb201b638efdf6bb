"""Render configuration."""

from __future__ import annotations

from dataclasses import dataclass

from .. import defaults


@dataclass(frozen=True)
class SimConfig:
    dt: float = defaults.DEFAULT_DT
    timeout_s: float = defaults.DEFAULT_TIMEOUT_S
    seed: int = 0
    gap: float = defaults.DEFAULT_GAP
    trigger_distance: float = defaults.TRIGGER_DISTANCE
    lane_change_length: float = defaults.LANE_CHANGE_LENGTH
    action_distance: float = defaults.ACTION_DISTANCE
    approach_offset: float = defaults.APPROACH_OFFSET
    turn_entry_completion: float = defaults.TURN_ENTRY_COMPLETION
    tau: float = defaults.FOLLOW_TAU
    junction_radius: float = defaults.JUNCTION_RADIUS
    yield_range: float = defaults.YIELD_RANGE
    block_gap: float = defaults.BLOCK_GAP
    spawn_margin: float = defaults.SPAWN_MARGIN

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be positive")
