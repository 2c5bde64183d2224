/** Explorer round trip against a live prediction service.
 *
 * Skipped unless EXPLORER_SERVER_URL points at a running server with a
 * G=10 shell model, e.g.
 *   formfind serve --task shells --scale paper --model model.json --port 8000
 *   EXPLORER_SERVER_URL=http://127.0.0.1:8000 npm test
 */
import { describe, expect, it } from "vitest";
import { Client } from "../src/api.js";
import { clampControlPoint, referenceGrid } from "../src/params.js";
import { RequestScheduler } from "../src/scheduler.js";
import { PredictionResponse, ShellRequest, Vec3 } from "../src/types.js";

const SERVER = process.env["EXPLORER_SERVER_URL"];

function domeControls(lift: number): Vec3[] {
  const pts = referenceGrid();
  return pts.map((p, i) => {
    const e = Math.floor(i / 4);
    const g = i % 4;
    const inner = e >= 1 && e <= 2 && g >= 1 && g <= 2;
    return inner ? clampControlPoint(i, [p[0], p[1], lift]) : p;
  });
}

describe.skipIf(!SERVER)("explorer round trip (live server)", () => {
  const client = new Client(SERVER ?? "");

  it("a control-point drag renders an equilibrium state quickly", async () => {
    const request: ShellRequest = { control_points: domeControls(4), grid: 10 };
    const start = performance.now();
    const response = await client.predictShell(request, new AbortController().signal);
    const latency = performance.now() - start;
    expect(response.residual_fro).toBeLessThanOrEqual(1e-6);
    expect(latency).toBeLessThan(200);
    expect(response.positions).toHaveLength(100);
    expect(response.q.length).toBeGreaterThan(0);
  });

  it("stale responses never overwrite newer ones under rapid edits", async () => {
    const applied: number[] = [];
    let latest: PredictionResponse | null = null;
    const scheduler = new RequestScheduler<ShellRequest, PredictionResponse>(
      (req, signal) => client.predictShell(req, signal),
      (res, seq) => {
        applied.push(seq);
        latest = res;
      },
      (err) => {
        throw err;
      },
      5,
    );
    // a burst of drags; each flush supersedes the previous in-flight request
    for (let k = 0; k < 8; k += 1) {
      scheduler.submit({ control_points: domeControls(1 + k * 0.5), grid: 10 });
      await new Promise((resolve) => setTimeout(resolve, 12));
    }
    await new Promise((resolve) => setTimeout(resolve, 500));
    expect(applied.length).toBeGreaterThan(0);
    for (let k = 1; k < applied.length; k += 1) {
      expect(applied[k]!).toBeGreaterThan(applied[k - 1]!);
    }
    expect(scheduler.lastRenderedSeq).toBe(applied[applied.length - 1]);
    // the displayed state corresponds to the final edit (lift 4.5)
    const final = await client.predictShell(
      { control_points: domeControls(4.5), grid: 10 },
      new AbortController().signal,
    );
    expect(latest!.shape_loss).toBeCloseTo(final.shape_loss, 9);
  });
});
