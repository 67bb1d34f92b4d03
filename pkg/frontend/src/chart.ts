/** Geometry for the metric series chart.
 *
 * Undefined metric frames (null) break the polyline into separate
 * segments — they are gaps, never zeros.
 */

export interface ChartPoint {
  x: number;
  y: number;
}

export interface ChartModel {
  /** Disjoint polyline segments; each has at least one point. */
  segments: ChartPoint[][];
  /** Pixel x of the playback cursor. */
  cursorX: number;
  yMin: number;
  yMax: number;
}

export function definedRange(
  series: (number | null)[],
): { min: number; max: number } | null {
  let min = Number.POSITIVE_INFINITY;
  let max = Number.NEGATIVE_INFINITY;
  for (const value of series) {
    if (value === null) continue;
    if (value < min) min = value;
    if (value > max) max = value;
  }
  return min <= max ? { min, max } : null;
}

export function buildChartModel(
  series: (number | null)[],
  cursor: number,
  width: number,
  height: number,
): ChartModel {
  const range = definedRange(series) ?? { min: 0, max: 1 };
  const span = range.max - range.min || 1;
  const n = Math.max(series.length - 1, 1);
  const xOf = (i: number): number => (i / n) * width;
  // larger values at the top of the canvas
  const yOf = (v: number): number => height - ((v - range.min) / span) * height;

  const segments: ChartPoint[][] = [];
  let current: ChartPoint[] = [];
  series.forEach((value, i) => {
    if (value === null) {
      if (current.length > 0) segments.push(current);
      current = [];
    } else {
      current.push({ x: xOf(i), y: yOf(value) });
    }
  });
  if (current.length > 0) segments.push(current);

  return {
    segments,
    cursorX: xOf(Math.min(Math.max(cursor, 0), series.length - 1)),
    yMin: range.min,
    yMax: range.max,
  };
}
