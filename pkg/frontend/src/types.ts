/** Payload and session types for the prediction service. */

export type Vec3 = [number, number, number];

export interface PredictionResponse {
  target: Vec3[];
  positions: Vec3[];
  q: number[];
  forces: number[];
  lengths: number[];
  residual_fro: number;
  shape_loss: number;
  elapsed_ms: number;
}

export interface ShellRequest {
  control_points: Vec3[];
  grid: number;
}

export interface RingParams {
  alpha1: number;
  alpha2: number;
  beta: number;
}

export interface TowerRequest {
  rings: { bottom: RingParams; middle: RingParams; top: RingParams };
}

export interface TaskInfo {
  nodes: number;
  bars: number;
  fixed: number;
  kind: string;
}

export type TaskName = "shell" | "tower";

export interface SessionState {
  task: TaskName;
  /** 16 control points as a flat list ordered row-major over the 4x4 grid. */
  controlPoints: Vec3[];
  rings: { bottom: RingParams; middle: RingParams; top: RingParams };
  /** Sequence number of the response currently on screen. */
  renderedSeq: number;
  lastResponse: PredictionResponse | null;
  /** Non-blocking error banner text; empty when the last request succeeded. */
  error: string;
}

export const PLAN_WIDTH = 10;

export function initialState(task: TaskName, referencePoints: Vec3[]): SessionState {
  return {
    task,
    controlPoints: referencePoints.map((p) => [...p] as Vec3),
    rings: {
      bottom: { alpha1: 1, alpha2: 1, beta: 0 },
      middle: { alpha1: 1, alpha2: 1, beta: 0 },
      top: { alpha1: 1, alpha2: 1, beta: 0 },
    },
    renderedSeq: 0,
    lastResponse: null,
    error: "",
  };
}
