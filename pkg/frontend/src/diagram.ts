/** Geometry for the top-down lane diagram.
 *
 * Rendered from lane ids and x positions only (no map); the y values
 * provide the within-lane offset.  The ego is drawn solid, targets
 * dashed.
 */
import type { FrameJson, FramesResponse, VehicleState } from "./types.js";

export interface VehicleBox {
  id: number;
  isEgo: boolean;
  x: number;
  y: number;
  width: number;
  height: number;
  dashed: boolean;
}

export interface DiagramModel {
  laneBounds: { lane: number; yTop: number; yBottom: number }[];
  vehicles: VehicleBox[];
}

const LANE_HEIGHT_PX = 40;
const MARGIN_PX = 10;

/** Lanes that appear anywhere in the playback window, in drawing order. */
export function lanesInPlayback(playback: FramesResponse): number[] {
  const lanes = new Set<number>();
  for (const frame of playback.frames) {
    for (const vehicle of frame.vehicles) lanes.add(vehicle.lane);
  }
  return [...lanes].sort((a, b) => a - b);
}

/** x range over the whole window so the viewport does not jump per frame. */
export function xRange(playback: FramesResponse): { min: number; max: number } {
  let min = Number.POSITIVE_INFINITY;
  let max = Number.NEGATIVE_INFINITY;
  for (const frame of playback.frames) {
    for (const vehicle of frame.vehicles) {
      min = Math.min(min, vehicle.x);
      max = Math.max(max, vehicle.x + vehicle.width);
    }
  }
  if (min > max) return { min: 0, max: 1 };
  return { min, max };
}

export function buildDiagramModel(
  frame: FrameJson,
  lanes: number[],
  range: { min: number; max: number },
  width: number,
): DiagramModel {
  const span = range.max - range.min || 1;
  const scale = (width - 2 * MARGIN_PX) / span;
  const laneIndex = new Map(lanes.map((lane, i) => [lane, i]));

  const laneBounds = lanes.map((lane, i) => ({
    lane,
    yTop: MARGIN_PX + i * LANE_HEIGHT_PX,
    yBottom: MARGIN_PX + (i + 1) * LANE_HEIGHT_PX,
  }));

  const vehicles = frame.vehicles.map((v: VehicleState): VehicleBox => {
    const row = laneIndex.get(v.lane) ?? 0;
    const yCenter = MARGIN_PX + row * LANE_HEIGHT_PX + LANE_HEIGHT_PX / 2;
    const heightPx = Math.min(v.height * scale, LANE_HEIGHT_PX - 8);
    return {
      id: v.id,
      isEgo: v.is_ego,
      x: MARGIN_PX + (v.x - range.min) * scale,
      y: yCenter - heightPx / 2,
      width: v.width * scale,
      height: heightPx,
      dashed: !v.is_ego,
    };
  });

  return { laneBounds, vehicles };
}

export function diagramHeight(laneCount: number): number {
  return 2 * MARGIN_PX + Math.max(laneCount, 1) * LANE_HEIGHT_PX;
}
