/** Bar colors from the response's force densities only: compression
 * (q < 0) in blues, tension (q > 0) in reds, brightness by relative
 * magnitude within the current response. */

export interface Rgb {
  r: number;
  g: number;
  b: number;
}

export function barColor(q: number, qAbsMax: number): Rgb {
  const t = qAbsMax > 0 ? Math.min(1, Math.abs(q) / qAbsMax) : 0;
  const base = 0.25 + 0.75 * t; // keep near-zero bars visible
  if (q < 0) return { r: 0.15, g: 0.35 * (1 - t) + 0.2, b: base };
  return { r: base, g: 0.3 * (1 - t) + 0.1, b: 0.15 };
}

export function barColors(q: number[]): Rgb[] {
  const qAbsMax = q.reduce((m, v) => Math.max(m, Math.abs(v)), 0);
  return q.map((v) => barColor(v, qAbsMax));
}
