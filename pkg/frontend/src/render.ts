// Canvas drawing for map digests and frames. The context is typed as the
// subset of CanvasRenderingContext2D we use, so tests can record the calls.

import type { Frame, MapDigest } from "./types.js";

export interface Draw2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  fill(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  save(): void;
  restore(): void;
  translate(x: number, y: number): void;
  rotate(angle: number): void;
  scale(x: number, y: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
}

const LANE_COLORS: Record<string, string> = {
  driving: "#8e959c",
  shoulder: "#c8a165",
  sidewalk: "#d9d9d9",
};

const AGENT_COLORS: Record<string, string> = {
  car: "#3b73c4",
  police: "#1f3a93",
  ambulance: "#dfe6e9",
  firetruck: "#c0392b",
  bus: "#8e44ad",
  truck: "#7f8c8d",
  motorcycle: "#16a085",
  cyclist: "#27ae60",
  pedestrian: "#e67e22",
};

const FOOTPRINTS: Record<string, [number, number]> = {
  car: [4.5, 1.9],
  police: [4.8, 1.9],
  ambulance: [5.6, 2.2],
  firetruck: [8.5, 2.6],
  bus: [11.0, 2.9],
  truck: [8.2, 2.5],
  motorcycle: [2.2, 0.8],
  cyclist: [1.9, 0.6],
  pedestrian: [0.6, 0.6],
};

export interface ViewBox {
  minX: number;
  minY: number;
  maxX: number;
  maxY: number;
}

export function computeViewBox(digest: MapDigest, pad = 12): ViewBox {
  let minX = Infinity;
  let minY = Infinity;
  let maxX = -Infinity;
  let maxY = -Infinity;
  for (const road of digest.roads) {
    for (const lane of road.lanes) {
      for (const [x, y] of lane.polyline) {
        minX = Math.min(minX, x);
        minY = Math.min(minY, y);
        maxX = Math.max(maxX, x);
        maxY = Math.max(maxY, y);
      }
    }
  }
  if (!isFinite(minX)) {
    minX = minY = -50;
    maxX = maxY = 50;
  }
  return { minX: minX - pad, minY: minY - pad, maxX: maxX + pad, maxY: maxY + pad };
}

/**
 * Draw one frame onto the canvas.
 *
 * World coordinates are mapped into a width x height pixel canvas with the y
 * axis flipped so north is up. Returns the number of agent glyphs drawn;
 * rendering has no side effects besides the context calls, so re-drawing the
 * same tick twice issues the identical call sequence.
 */
export function drawScene(
  ctx: Draw2D,
  digest: MapDigest,
  frame: Frame | null,
  width: number,
  height: number,
  box?: ViewBox,
): number {
  const view = box ?? computeViewBox(digest);
  const scale = Math.min(width / (view.maxX - view.minX), height / (view.maxY - view.minY));

  const px = (x: number) => (x - view.minX) * scale;
  const py = (y: number) => height - (y - view.minY) * scale;

  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#f4f1ea";
  ctx.fillRect(0, 0, width, height);

  for (const road of digest.roads) {
    for (const lane of road.lanes) {
      ctx.strokeStyle = LANE_COLORS[lane.kind] ?? "#999";
      ctx.lineWidth = Math.max(1, lane.width * scale);
      ctx.beginPath();
      lane.polyline.forEach(([x, y], i) => {
        if (i === 0) ctx.moveTo(px(x), py(y));
        else ctx.lineTo(px(x), py(y));
      });
      ctx.stroke();
    }
  }

  if (!frame) return 0;
  let glyphs = 0;
  for (const agent of frame.agents) {
    const [length, agentWidth] = FOOTPRINTS[agent.type] ?? [4.0, 1.8];
    ctx.fillStyle = AGENT_COLORS[agent.type] ?? "#333";
    if (agent.type === "pedestrian") {
      ctx.beginPath();
      ctx.arc(px(agent.x), py(agent.y), Math.max(2, 0.5 * scale), 0, 2 * Math.PI);
      ctx.fill();
    } else {
      ctx.save();
      ctx.translate(px(agent.x), py(agent.y));
      ctx.rotate(-agent.heading); // canvas y is flipped
      ctx.fillRect(
        (-length / 2) * scale,
        (-agentWidth / 2) * scale,
        length * scale,
        agentWidth * scale,
      );
      ctx.restore();
    }
    glyphs += 1;
  }
  return glyphs;
}
