/** three.js scene: target surface wireframe, predicted bar system colored
 * by force density, and drag handles for the shell control points. */
import * as THREE from "three";
import { barColors } from "./colors.js";
import { Bar } from "./topology.js";
import { PredictionResponse, Vec3 } from "./types.js";

export class Viewer {
  readonly scene = new THREE.Scene();
  private readonly perspective: THREE.PerspectiveCamera;
  private readonly orthographic: THREE.OrthographicCamera;
  private usePerspective = true;
  private readonly renderer: THREE.WebGLRenderer;
  private predicted: THREE.LineSegments | null = null;
  private targetWire: THREE.LineSegments | null = null;
  readonly handles: THREE.Mesh[] = [];

  constructor(private readonly canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    const aspect = canvas.clientWidth / Math.max(1, canvas.clientHeight);
    this.perspective = new THREE.PerspectiveCamera(45, aspect, 0.1, 500);
    this.perspective.position.set(14, -16, 10);
    this.perspective.up.set(0, 0, 1);
    this.perspective.lookAt(0, 0, 2);
    const span = 12;
    this.orthographic = new THREE.OrthographicCamera(
      -span * aspect, span * aspect, span, -span, 0.1, 500,
    );
    this.orthographic.position.copy(this.perspective.position);
    this.orthographic.up.set(0, 0, 1);
    this.orthographic.lookAt(0, 0, 2);
    this.scene.background = new THREE.Color(0x10141a);
    this.scene.add(new THREE.AxesHelper(2));
  }

  get camera(): THREE.Camera {
    return this.usePerspective ? this.perspective : this.orthographic;
  }

  toggleProjection(): void {
    this.usePerspective = !this.usePerspective;
    this.draw();
  }

  private static segmentGeometry(positions: Vec3[], bars: Bar[]): THREE.BufferGeometry {
    const coords = new Float32Array(bars.length * 6);
    bars.forEach(([i, j], m) => {
      coords.set(positions[i]!, m * 6);
      coords.set(positions[j]!, m * 6 + 3);
    });
    const geometry = new THREE.BufferGeometry();
    geometry.setAttribute("position", new THREE.BufferAttribute(coords, 3));
    return geometry;
  }

  showTarget(positions: Vec3[], bars: Bar[]): void {
    if (this.targetWire) this.scene.remove(this.targetWire);
    const geometry = Viewer.segmentGeometry(positions, bars);
    const material = new THREE.LineBasicMaterial({
      color: 0x5a6472, transparent: true, opacity: 0.6,
    });
    this.targetWire = new THREE.LineSegments(geometry, material);
    this.scene.add(this.targetWire);
  }

  showPrediction(response: PredictionResponse, bars: Bar[]): void {
    if (this.predicted) this.scene.remove(this.predicted);
    const geometry = Viewer.segmentGeometry(response.positions, bars);
    const colors = barColors(response.q);
    const rgb = new Float32Array(bars.length * 6);
    colors.forEach((c, m) => {
      rgb.set([c.r, c.g, c.b, c.r, c.g, c.b], m * 6);
    });
    geometry.setAttribute("color", new THREE.BufferAttribute(rgb, 3));
    this.predicted = new THREE.LineSegments(
      geometry, new THREE.LineBasicMaterial({ vertexColors: true }),
    );
    this.scene.add(this.predicted);
    this.draw();
  }

  setHandles(points: Vec3[], editable: (index: number) => boolean): void {
    for (const h of this.handles) this.scene.remove(h);
    this.handles.length = 0;
    points.forEach((p, index) => {
      const mesh = new THREE.Mesh(
        new THREE.SphereGeometry(0.18, 12, 12),
        new THREE.MeshBasicMaterial({ color: editable(index) ? 0xffc24d : 0x444a52 }),
      );
      mesh.position.set(p[0], p[1], p[2]);
      mesh.userData.index = index;
      this.scene.add(mesh);
      this.handles.push(mesh);
    });
    this.draw();
  }

  moveHandle(index: number, p: Vec3): void {
    const mesh = this.handles[index];
    if (mesh) mesh.position.set(p[0], p[1], p[2]);
  }

  draw(): void {
    this.renderer.setSize(this.canvas.clientWidth, this.canvas.clientHeight, false);
    this.renderer.render(this.scene, this.camera);
  }
}
