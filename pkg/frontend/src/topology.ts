/** Bar connectivity for the two task families, matching the server's node
 * ordering so exported OBJ files are byte-identical to the reference
 * exporter for identical positions. */

export type Bar = [number, number];

/** Square grid of side G, row-major nodes; x-direction bars first, then y. */
export function gridShellBars(gridSide: number): Bar[] {
  const g = gridSide;
  const bars: Bar[] = [];
  for (let r = 0; r < g; r += 1)
    for (let c = 0; c < g - 1; c += 1) bars.push([r * g + c, r * g + c + 1]);
  for (let r = 0; r < g - 1; r += 1)
    for (let c = 0; c < g; c += 1) bars.push([r * g + c, (r + 1) * g + c]);
  return bars;
}

/** D rings of k nodes, ring-major bottom to top; circumferential bars ring
 * by ring, then vertical bars between consecutive rings. */
export function towerBars(numRings: number, pointsPerRing: number): Bar[] {
  const bars: Bar[] = [];
  for (let d = 0; d < numRings; d += 1)
    for (let i = 0; i < pointsPerRing; i += 1)
      bars.push([d * pointsPerRing + i, d * pointsPerRing + ((i + 1) % pointsPerRing)]);
  for (let d = 0; d < numRings - 1; d += 1)
    for (let i = 0; i < pointsPerRing; i += 1)
      bars.push([d * pointsPerRing + i, (d + 1) * pointsPerRing + i]);
  return bars;
}
