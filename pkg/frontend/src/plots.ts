// Pure plotting geometry: SVG path strings and heatmap colors.
// Kept DOM-free so the math is unit-testable.

import type { SpectralPayload, VectorPayload } from "./types.js";

export interface Box {
  width: number;
  height: number;
  pad: number;
}

/** SVG path for a hysteresis loop: voltage on x, response on y, closed. */
export function loopPath(payload: SpectralPayload, box: Box): string {
  const { voltage, response } = payload;
  if (voltage.length === 0) return "";
  const vMin = Math.min(...voltage);
  const vMax = Math.max(...voltage);
  const rMin = Math.min(...response);
  const rMax = Math.max(...response);
  const sx = (v: number) =>
    box.pad +
    ((v - vMin) / Math.max(vMax - vMin, 1e-12)) * (box.width - 2 * box.pad);
  const sy = (r: number) =>
    box.height -
    box.pad -
    ((r - rMin) / Math.max(rMax - rMin, 1e-12)) * (box.height - 2 * box.pad);
  const parts = voltage.map(
    (v, i) =>
      `${i === 0 ? "M" : "L"}${sx(v).toFixed(2)},${sy(response[i]).toFixed(2)}`,
  );
  return parts.join(" ") + " Z";
}

export interface Arrow {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  outOfPlane: number; // z component, for coloring
}

/** In-plane arrow glyphs for a vector-field patch, one per pixel. */
export function arrowGlyphs(payload: VectorPayload, cell: number): Arrow[] {
  const out: Arrow[] = [];
  const rows = payload.vectors.length;
  for (let r = 0; r < rows; r++) {
    const cols = payload.vectors[r].length;
    for (let c = 0; c < cols; c++) {
      const [vx, vy, vz] = payload.vectors[r][c];
      const norm = Math.hypot(vx, vy) || 1;
      const len = (cell * 0.45 * Math.hypot(vx, vy)) / norm;
      const cx = (c + 0.5) * cell;
      const cy = (r + 0.5) * cell;
      out.push({
        x1: cx - (vx / norm) * len * 0.5,
        y1: cy + (vy / norm) * len * 0.5, // screen y grows downward
        x2: cx + (vx / norm) * len * 0.5,
        y2: cy - (vy / norm) * len * 0.5,
        outOfPlane: vz,
      });
    }
  }
  return out;
}

/** Map a unit value to a blue->green->yellow ramp (viridis-ish). */
export function heatColor(t: number): [number, number, number] {
  const x = Math.min(1, Math.max(0, t));
  const r = Math.round(255 * Math.min(1, Math.max(0, 1.5 * x - 0.4)));
  const g = Math.round(255 * Math.min(1, 0.1 + 0.9 * x));
  const b = Math.round(255 * Math.max(0, 0.6 - 0.55 * x));
  return [r, g, b];
}

/** Normalize a 2-D map to [0,1]; constant maps render mid-scale. */
export function normalizeMap(values: number[][]): number[][] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const row of values)
    for (const v of row) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  if (!(hi > lo)) return values.map((row) => row.map(() => 0.5));
  return values.map((row) => row.map((v) => (v - lo) / (hi - lo)));
}

/** Indices of the k highest (or lowest) cells of a flattened map. */
export function extremeCells(
  values: number[][],
  k: number,
  lowest: boolean,
): Array<{ row: number; col: number; value: number }> {
  const flat: Array<{ row: number; col: number; value: number }> = [];
  values.forEach((row, r) =>
    row.forEach((v, c) => flat.push({ row: r, col: c, value: v })),
  );
  flat.sort((a, b) => (lowest ? a.value - b.value : b.value - a.value));
  return flat.slice(0, k);
}
