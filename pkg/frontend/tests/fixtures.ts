// Canned server payloads mirroring the live wire formats (captured from a
// real run of the golden four-agent scenario on the ranking map).

import type { Frame, MapDigest, RunRecord, Selection } from "../src/types.js";

export const GOLDEN_SELECTION: Selection = {
  scores: {
    "1": {
      total: 5,
      per_check: {
        "adjacent:left": true,
        "adjacent_straight:left": true,
        "capacity:2": true,
        "lane:shoulder": true,
        "turn:right": true,
      },
    },
    "2": {
      total: 3,
      per_check: {
        "adjacent:left": false,
        "adjacent_straight:left": true,
        "capacity:2": false,
        "lane:shoulder": true,
        "turn:right": true,
      },
    },
    "3": {
      total: 3,
      per_check: {
        "adjacent:left": false,
        "adjacent_straight:left": false,
        "capacity:2": true,
        "lane:shoulder": true,
        "turn:right": true,
      },
    },
    "4": {
      total: 3,
      per_check: {
        "adjacent:left": true,
        "adjacent_straight:left": true,
        "capacity:2": false,
        "lane:shoulder": false,
        "turn:right": true,
      },
    },
    "5": {
      total: 3,
      per_check: {
        "adjacent:left": true,
        "adjacent_straight:left": false,
        "capacity:2": true,
        "lane:shoulder": false,
        "turn:right": true,
      },
    },
  },
  chosen: "1",
  seed: 2,
};

export const GOLDEN_FRAME_0: Frame = {
  tick: 0,
  t: 0.0,
  agents: [
    { id: "a0", type: "car", x: 1.75, y: -40.0, heading: 1.5708, speed: 0.0, action: "turn right", done: false },
    { id: "a1", type: "car", x: 5.25, y: -32.0, heading: 1.5708, speed: 0.0, action: "turn right", done: false },
    { id: "a2", type: "car", x: -25.0, y: -1.75, heading: 0.0, speed: 0.0, action: "turn left", done: false },
    { id: "a3", type: "pedestrian", x: -10.25, y: -40.0, heading: 1.5708, speed: 0.0, action: "cross the road", done: false },
  ],
};

export const GOLDEN_FRAME_1: Frame = {
  tick: 1,
  t: 0.1,
  agents: GOLDEN_FRAME_0.agents.map((a) =>
    a.type === "pedestrian" ? a : { ...a, y: a.y + 0.03, speed: 0.25 },
  ),
};

export const DIGEST: MapDigest = {
  name: "ranking",
  roads: [
    {
      id: "1",
      base_id: "1",
      length: 60,
      lanes: [
        { lane_id: -1, kind: "driving", width: 3.5, polyline: [[1.75, -70], [1.75, -10]] },
        { lane_id: -4, kind: "shoulder", width: 2.5, polyline: [[-11.75, -70], [-11.75, -10]] },
      ],
      signals: [],
      objects: ["stop line"],
      junction_options: ["left", "right", "straight"],
    },
    {
      id: "102",
      base_id: "102",
      length: 50,
      lanes: [
        { lane_id: -1, kind: "driving", width: 3.5, polyline: [[-1.75, 10], [-1.75, 60]] },
      ],
      signals: [],
      objects: [],
      junction_options: [],
    },
  ],
};

export function runRecord(overrides: Partial<RunRecord> = {}): RunRecord {
  return {
    id: "fe314e091779",
    status: "done",
    stage: null,
    error: null,
    request: { prompt: "golden", map: "ranking", mode: "analysis_then_stage", seed: 2, backend: "mock" },
    artifacts: { selection: GOLDEN_SELECTION },
    parent: null,
    outcome: { kind: "completed", collisions: [] },
    frames: 2,
    ...overrides,
  };
}

export const RUN_FAILED = runRecord({
  id: "bad111111111",
  status: "failed",
  error: {
    stage: "retrieval",
    type: "NoCandidateError",
    message: "no road satisfies the retrieval conditions",
  },
  artifacts: {},
  outcome: null,
  frames: 0,
});

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function jsonlResponse(frames: Frame[]): Response {
  return new Response(frames.map((f) => JSON.stringify(f)).join("\n") + "\n", {
    status: 200,
    headers: { "Content-Type": "application/jsonl" },
  });
}
