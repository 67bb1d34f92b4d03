import { describe, expect, it } from "vitest";

import {
  buildDiagramModel,
  diagramHeight,
  lanesInPlayback,
  xRange,
} from "../src/diagram.js";
import type { FrameJson, FramesResponse, VehicleState } from "../src/types.js";

function vehicle(
  id: number,
  isEgo: boolean,
  x: number,
  lane: number,
): VehicleState {
  return { id, is_ego: isEgo, x, y: lane * 4, lane, width: 4, height: 2 };
}

function playback(frames: FrameJson[]): FramesResponse {
  return {
    scenario_id: "scn-0001",
    window: [0, frames.length - 1],
    frame_rate: 25,
    metric: null,
    frames,
  };
}

const CUT_IN = playback([
  {
    frame: 0,
    time: 0,
    vehicles: [vehicle(1, true, 100, 3), vehicle(2, false, 120, 2)],
    metrics: {},
  },
  {
    frame: 1,
    time: 0.04,
    vehicles: [vehicle(1, true, 101, 3), vehicle(2, false, 122, 3)],
    metrics: {},
  },
]);

describe("lane diagram geometry", () => {
  it("derives lanes and a stable x range from the whole window", () => {
    expect(lanesInPlayback(CUT_IN)).toEqual([2, 3]);
    expect(xRange(CUT_IN)).toEqual({ min: 100, max: 126 });
  });

  it("draws the ego solid and targets dashed", () => {
    const model = buildDiagramModel(
      CUT_IN.frames[0]!,
      [2, 3],
      xRange(CUT_IN),
      720,
    );
    const ego = model.vehicles.find((v) => v.isEgo)!;
    const target = model.vehicles.find((v) => !v.isEgo)!;
    expect(ego.dashed).toBe(false);
    expect(target.dashed).toBe(true);
  });

  it("places vehicles in their lane rows", () => {
    const lanes = [2, 3];
    const range = xRange(CUT_IN);
    const before = buildDiagramModel(CUT_IN.frames[0]!, lanes, range, 720);
    const after = buildDiagramModel(CUT_IN.frames[1]!, lanes, range, 720);
    const rowOf = (m: typeof before, id: number): number =>
      m.vehicles.find((v) => v.id === id)!.y;
    // the target starts in the adjacent lane row and ends in the ego's row
    expect(rowOf(before, 2)).not.toBeCloseTo(rowOf(before, 1));
    expect(rowOf(after, 2)).toBeCloseTo(rowOf(after, 1));
  });

  it("orders vehicles left to right by x", () => {
    const model = buildDiagramModel(
      CUT_IN.frames[0]!,
      [2, 3],
      xRange(CUT_IN),
      720,
    );
    const ego = model.vehicles.find((v) => v.isEgo)!;
    const target = model.vehicles.find((v) => !v.isEgo)!;
    expect(target.x).toBeGreaterThan(ego.x);
  });

  it("sizes the canvas by lane count", () => {
    expect(diagramHeight(2)).toBeGreaterThan(diagramHeight(1));
    expect(diagramHeight(0)).toBeGreaterThan(0);
  });
});
