/** Editable-parameter ranges and clamping.
 *
 * Control-point handles clamp to the sampling bounds of the training
 * distribution: per-class translation boxes relative to the flat reference
 * grid, mirrored in sign across the four plan quadrants. Slider ranges for
 * tower rings match the sampling ranges exactly.
 */
import { PLAN_WIDTH, RingParams, Vec3 } from "./types.js";

export const ALPHA_MIN = 0.5;
export const ALPHA_MAX = 1.4999;
export const BETA_MAX = Math.PI / 12 - 1e-9;
export const BETA_MIN = -Math.PI / 12;

export function clampRing(ring: RingParams): RingParams {
  const clamp = (v: number, lo: number, hi: number) => Math.min(hi, Math.max(lo, v));
  return {
    alpha1: clamp(ring.alpha1, ALPHA_MIN, ALPHA_MAX),
    alpha2: clamp(ring.alpha2, ALPHA_MIN, ALPHA_MAX),
    beta: clamp(ring.beta, BETA_MIN, BETA_MAX),
  };
}

/** Flat reference control grid: x and y on {-w/2, -w/6, w/6, w/2}, z = 0. */
export function referenceGrid(w: number = PLAN_WIDTH): Vec3[] {
  const coords = [-w / 2, -w / 6, w / 6, w / 2];
  const pts: Vec3[] = [];
  for (const x of coords) for (const y of coords) pts.push([x, y, 0]);
  return pts;
}

type Box = { lo: Vec3; hi: Vec3 };

/** Translation bounds per class for the x > 0, y > 0 quadrant. */
function classBox(e: number, g: number, w: number): Box | null {
  const xOuter = e === 0 || e === 3;
  const yOuter = g === 0 || g === 3;
  if (xOuter && yOuter) return null; // static corner
  if (xOuter) return { lo: [-w / 2, 0, 0], hi: [w / 2, 0, w / 2] };
  if (yOuter) return { lo: [0, -w / 2, 0], hi: [0, w / 2, 0] };
  // inner points keep z >= 0 so the handle can return to the flat start
  return { lo: [0, 0, 0], hi: [0, 0, w] };
}

/**
 * Clamp a dragged control point into its class box. ``index`` is the
 * row-major position in the 4x4 grid; the x/y bounds flip sign with the
 * point's quadrant so every handle moves symmetrically to its mirror.
 */
export function clampControlPoint(index: number, pos: Vec3, w: number = PLAN_WIDTH): Vec3 {
  const e = Math.floor(index / 4);
  const g = index % 4;
  const ref = referenceGrid(w)[index]!;
  const box = classBox(e, g, w);
  if (box === null) return [...ref] as Vec3;
  const sx = e >= 2 ? 1 : -1;
  const sy = g >= 2 ? 1 : -1;
  const signs = [sx, sy, 1];
  const out: Vec3 = [0, 0, 0];
  for (let c = 0; c < 3; c += 1) {
    const delta = (pos[c]! - ref[c]!) * signs[c]!;
    const clamped = Math.min(box.hi[c]!, Math.max(box.lo[c]!, delta));
    out[c] = ref[c]! + clamped * signs[c]!;
  }
  return out;
}

/** Whether the handle at ``index`` can move at all (corners are static). */
export function isEditable(index: number): boolean {
  const e = Math.floor(index / 4);
  const g = index % 4;
  return !((e === 0 || e === 3) && (g === 0 || g === 3));
}
