#!/usr/bin/env python3
"""Token-usage comparison across the four prompting modes on the mock backend.

Counts whitespace tokens of backend completions per pipeline run, averaged
over a set of showcase prompts, to show the expected ordering:
direct < analysis < cot < analysis+cot.
"""

from __future__ import annotations

from scenegen.mock_backend import MockBackend
from scenegen.planner import MODES, PromptRequest, TokenUsage, plan_all

PROMPTS = [
    "The ego car is going straight",
    "two cars in front block the ego car",
    "A pedestrian on the sidewalk is crossing the street in front of a truck stopping on the "
    "shoulder. Both are located on the front right.",
    "Daily traffic at the intersection with more than ten cars, no traffic lights.",
    "Two cars from the opposite straight is coming when the ego car is turning left",
]


def main():
    print(f"{'mode':<20} {'calls':>6} {'prompt tok':>11} {'output tok':>11} {'total':>8}")
    for mode in MODES:
        calls = prompt_tokens = completion_tokens = 0
        for text in PROMPTS:
            usage = TokenUsage()
            plan_all(PromptRequest(text=text, mode=mode, seed=0), MockBackend(0), usage)
            calls += usage.calls
            prompt_tokens += usage.prompt_tokens
            completion_tokens += usage.completion_tokens
        n = len(PROMPTS)
        print(f"{mode:<20} {calls/n:>6.1f} {prompt_tokens/n:>11.0f} "
              f"{completion_tokens/n:>11.0f} {(prompt_tokens+completion_tokens)/n:>8.0f}")


if __name__ == "__main__":
    main()
