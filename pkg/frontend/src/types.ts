// Wire types for the scenegen HTTP API.

export interface MapInfo {
  name: string;
  roads: number;
  connections: number;
}

export interface LaneDigest {
  lane_id: number;
  kind: "driving" | "sidewalk" | "shoulder";
  width: number;
  polyline: [number, number][];
}

export interface RoadDigest {
  id: string;
  base_id: string;
  length: number;
  lanes: LaneDigest[];
  signals: string[];
  objects: string[];
  junction_options: string[];
}

export interface MapDigest {
  name: string;
  roads: RoadDigest[];
}

export interface FrameAgent {
  id: string;
  type: string;
  x: number;
  y: number;
  heading: number;
  speed: number;
  action: string;
  done: boolean;
}

export interface Frame {
  tick: number;
  t: number;
  agents: FrameAgent[];
}

export interface ScoreEntry {
  total: number;
  per_check: Record<string, boolean>;
}

export interface Selection {
  scores: Record<string, ScoreEntry>;
  chosen: string;
  seed: number;
}

export interface RunError {
  stage: string;
  type: string;
  message: string;
}

export interface RunRecord {
  id: string;
  status: "pending" | "running" | "failed" | "done";
  stage: string | null;
  error: RunError | null;
  request: { prompt: string; map: string; mode: string; seed: number; backend: string };
  artifacts: { selection?: Selection; plan?: unknown; [key: string]: unknown };
  parent: string | null;
  outcome: { kind: string; collisions: string[][] } | null;
  frames: number;
}
