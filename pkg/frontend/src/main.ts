/** Explorer wiring: edits -> debounced predictions -> live render. */
import * as THREE from "three";
import { ApiError, Client } from "./api.js";
import { exportObj } from "./obj.js";
import {
  clampControlPoint,
  clampRing,
  isEditable,
  referenceGrid,
  ALPHA_MAX,
  ALPHA_MIN,
  BETA_MAX,
  BETA_MIN,
} from "./params.js";
import { Viewer } from "./render.js";
import { RequestScheduler } from "./scheduler.js";
import { Bar, gridShellBars, towerBars } from "./topology.js";
import {
  initialState,
  PredictionResponse,
  RingParams,
  SessionState,
  ShellRequest,
  TowerRequest,
  Vec3,
} from "./types.js";

const SERVER = (window as { FORMFIND_SERVER?: string }).FORMFIND_SERVER ?? "http://127.0.0.1:8000";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const client = new Client(SERVER);
  const banner = el<HTMLDivElement>("banner");
  const badge = el<HTMLDivElement>("badge");
  const exportButton = el<HTMLButtonElement>("export");
  const toggleButton = el<HTMLButtonElement>("projection");
  const canvas = el<HTMLCanvasElement>("view");
  const viewer = new Viewer(canvas);
  toggleButton.onclick = () => viewer.toggleProjection();

  const tasks = await client.tasks().catch((err) => {
    banner.textContent = `server unreachable: ${String(err)}`;
    banner.hidden = false;
    return null;
  });
  if (!tasks) return;

  const shellInfo = tasks["shells"];
  const towerInfo = tasks["towers"];
  const grid = shellInfo ? Math.round(Math.sqrt(shellInfo.nodes)) : 0;
  let bars: Bar[] = shellInfo ? gridShellBars(grid) : [];
  let state: SessionState = initialState(shellInfo ? "shell" : "tower", referenceGrid());
  state.controlPoints = state.controlPoints.map((p, i) =>
    // start from a representable dome: inner points lifted
    isEditable(i) && i % 4 !== 0 && i % 4 !== 3 && i >= 4 && i < 12
      ? ([p[0], p[1], 4] as Vec3)
      : p,
  );

  const applyResponse = (response: PredictionResponse, seq: number): void => {
    state.lastResponse = response;
    state.renderedSeq = seq;
    state.error = "";
    banner.hidden = true;
    badge.textContent =
      `residual ${response.residual_fro.toExponential(2)} | ` +
      `shape ${response.shape_loss.toFixed(3)} | ${response.elapsed_ms.toFixed(1)} ms`;
    exportButton.disabled = false;
    viewer.showTarget(response.target, bars);
    viewer.showPrediction(response, bars);
  };

  const reportError = (err: unknown): void => {
    state.error = err instanceof ApiError ? err.message : `request failed: ${String(err)}`;
    banner.textContent = state.error;
    banner.hidden = false; // last valid render stays on screen
  };

  const scheduler = new RequestScheduler<ShellRequest | TowerRequest, PredictionResponse>(
    (req, signal) =>
      "control_points" in req
        ? client.predictShell(req, signal)
        : client.predictTower(req, signal),
    applyResponse,
    reportError,
  );

  const submitShell = (): void => {
    scheduler.submit({ control_points: state.controlPoints, grid });
  };
  const submitTower = (): void => {
    scheduler.submit({ rings: state.rings });
  };

  exportButton.disabled = true;
  exportButton.onclick = () => {
    if (!state.lastResponse) return;
    const text = exportObj(state.lastResponse.positions, bars);
    const blob = new Blob([text], { type: "model/obj" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = `formfind-${state.task}.obj`;
    link.click();
    URL.revokeObjectURL(link.href);
  };

  // --- shell control-point dragging -------------------------------------
  if (shellInfo) {
    viewer.setHandles(state.controlPoints, isEditable);
    const raycaster = new THREE.Raycaster();
    const pointer = new THREE.Vector2();
    let dragging = -1;
    const dragPlane = new THREE.Plane();

    const pointerRay = (event: PointerEvent): void => {
      const rect = canvas.getBoundingClientRect();
      pointer.x = ((event.clientX - rect.left) / rect.width) * 2 - 1;
      pointer.y = -((event.clientY - rect.top) / rect.height) * 2 + 1;
      raycaster.setFromCamera(pointer, viewer.camera);
    };

    canvas.addEventListener("pointerdown", (event) => {
      pointerRay(event);
      const hits = raycaster.intersectObjects(viewer.handles);
      const hit = hits.find((h) => isEditable(h.object.userData.index as number));
      if (!hit) return;
      dragging = hit.object.userData.index as number;
      // drag in the camera-facing plane through the handle
      const normal = new THREE.Vector3();
      viewer.camera.getWorldDirection(normal);
      dragPlane.setFromNormalAndCoplanarPoint(normal, hit.object.position);
      canvas.setPointerCapture(event.pointerId);
    });

    canvas.addEventListener("pointermove", (event) => {
      if (dragging < 0) return;
      pointerRay(event);
      const point = new THREE.Vector3();
      if (!raycaster.ray.intersectPlane(dragPlane, point)) return;
      const clamped = clampControlPoint(dragging, [point.x, point.y, point.z]);
      state.controlPoints[dragging] = clamped;
      viewer.moveHandle(dragging, clamped);
      viewer.draw();
      submitShell();
    });

    canvas.addEventListener("pointerup", () => {
      dragging = -1;
    });
    submitShell();
  }

  // --- tower ring sliders -------------------------------------------------
  const sliderBox = el<HTMLDivElement>("sliders");
  if (towerInfo) {
    const rings: (keyof SessionState["rings"])[] = ["bottom", "middle", "top"];
    for (const ring of rings) {
      for (const key of ["alpha1", "alpha2", "beta"] as (keyof RingParams)[]) {
        const isBeta = key === "beta";
        const input = document.createElement("input");
        input.type = "range";
        input.min = String(isBeta ? BETA_MIN : ALPHA_MIN);
        input.max = String(isBeta ? BETA_MAX : ALPHA_MAX);
        input.step = "0.001";
        input.value = String(state.rings[ring][key]);
        const label = document.createElement("label");
        label.textContent = `${ring} ${key}`;
        label.appendChild(input);
        sliderBox.appendChild(label);
        input.oninput = () => {
          const next = { ...state.rings[ring], [key]: Number(input.value) };
          state.rings = { ...state.rings, [ring]: clampRing(next) };
          if (state.task === "tower") submitTower();
        };
      }
    }
  }

  const taskSelect = el<HTMLSelectElement>("task");
  taskSelect.onchange = () => {
    state.task = taskSelect.value as SessionState["task"];
    if (state.task === "tower" && towerInfo) {
      // nodes = D*k and bars = (2D-1)*k, so k = 2*nodes - bars
      const k = 2 * towerInfo.nodes - towerInfo.bars;
      bars = towerBars(towerInfo.nodes / k, k);
      viewer.setHandles([], () => false);
      submitTower();
    } else if (shellInfo) {
      bars = gridShellBars(grid);
      viewer.setHandles(state.controlPoints, isEditable);
      submitShell();
    }
  };
}

boot().catch((err) => {
  const banner = document.getElementById("banner");
  if (banner) {
    banner.textContent = String(err);
    banner.hidden = false;
  }
});
