#!/usr/bin/env python3
"""Scene-diversity experiment over the eight underspecified scenarios.

Each scenario prompt is run five times with different seeds through the mock
planner; the table reports agent diversity (unique type/action/position
combinations over all planned agents) and road diversity (unique chosen base
roads over runs), the same ratio-of-unique-to-total metrics the engine's
rank-then-random selection is meant to drive up.

Usage: python3 scripts/diversity_experiment.py [--map parade] [--runs 5]
"""

from __future__ import annotations

import argparse
from collections import Counter

from scenegen.mock_backend import MockBackend
from scenegen.pipeline import MapRegistry
from scenegen.planner import PromptRequest, plan_all
from scenegen.ranker import rank_and_select, retrieve_candidates
from scenegen.roadgraph import base_road_id

SCENARIOS = [
    ("normal", "daily traffic"),
    ("normal", "an intersection"),
    ("critical", "pedestrian crushing"),
    ("critical", "a blocking agent"),
    ("critical", "a dangerous cut-off"),
    ("conditional", "only 2-wheels"),
    ("conditional", "emergency vehicles"),
    ("conditional", "rainy weather"),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--map", default="parade")
    parser.add_argument("--runs", type=int, default=5)
    parser.add_argument("--maps-dir", default=None)
    args = parser.parse_args()

    registry = MapRegistry(args.maps_dir)
    graph = registry.graph(args.map)

    print(f"{'category':<12} {'scenario':<22} {'AD':>6} {'RD':>6}  roads")
    ad_values, rd_values = [], []
    for category, scenario in SCENARIOS:
        prompt = f"Please create a scene for {scenario}"
        agent_keys = []
        roads = []
        for seed in range(args.runs):
            request = PromptRequest(text=prompt, seed=seed)
            _, conditions, plan = plan_all(request, MockBackend(seed))
            candidates = retrieve_candidates(graph, conditions)
            selection = rank_and_select(graph, candidates, plan, seed)
            roads.append(base_road_id(selection.chosen))
            for planned in plan.agents:
                if not planned.is_ego:
                    agent_keys.append((planned.type, planned.action, planned.relative_to_ego))
        ad = len(set(agent_keys)) / len(agent_keys) if agent_keys else 1.0
        rd = len(set(roads)) / len(roads)
        ad_values.append(ad)
        rd_values.append(rd)
        road_counts = ", ".join(f"{r}x{n}" if n > 1 else r for r, n in Counter(roads).items())
        print(f"{category:<12} {scenario:<22} {ad:>6.3f} {rd:>6.3f}  {road_counts}")
    print(f"{'avg':<12} {'':<22} {sum(ad_values)/len(ad_values):>6.3f} "
          f"{sum(rd_values)/len(rd_values):>6.3f}")


if __name__ == "__main__":
    main()
