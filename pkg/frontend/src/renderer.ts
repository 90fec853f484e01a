// three.js rasterization of the box model: labeled oriented boxes, strong
// dependency connectors, ground grid, orbit camera, picking and ground-plane
// dragging. All scene content arrives through setView(); nothing here ever
// invents or adjusts a pose.

import * as THREE from "three";

import { renderGroundDeltaToEngine } from "./frame.js";
import type { BoxInstance, Connector } from "./scene-model.js";

export interface RendererCallbacks {
  onPick(nid: number | null): void;
  onDrag(deltaEngine: [number, number]): void;
  /** Fired when an orbit/zoom gesture ends, so the view state can track it. */
  onOrbitChange?(camera: { theta: number; phi: number; radius: number }): void;
}

const BOX_COLOR = 0x7f93a6;
const HIGHLIGHT_COLOR = 0x4caf50;
const SELECT_COLOR = 0xff9800;

export class SceneRenderer {
  private readonly renderer: THREE.WebGLRenderer;
  private readonly scene = new THREE.Scene();
  private readonly camera: THREE.PerspectiveCamera;
  private readonly raycaster = new THREE.Raycaster();
  private readonly boxGroup = new THREE.Group();
  private readonly edgeGroup = new THREE.Group();
  private meshes = new Map<number, THREE.Mesh>();
  private orbit = { theta: Math.PI / 4, phi: Math.PI / 3.2, radius: 9, target: new THREE.Vector3(0, 0.5, 0) };
  private dragging: DragState | null = null;
  private rotating = false;
  private showConnectors = true;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly callbacks: RendererCallbacks,
  ) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.camera = new THREE.PerspectiveCamera(50, 1, 0.05, 200);
    this.scene.background = new THREE.Color(0x14181d);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.75));
    const sun = new THREE.DirectionalLight(0xffffff, 1.4);
    sun.position.set(4, 8, 2);
    this.scene.add(sun);
    this.scene.add(new THREE.GridHelper(12, 24, 0x3a4450, 0x262d35));
    this.scene.add(this.boxGroup);
    this.scene.add(this.edgeGroup);
    this.bindInput();
    this.resize();
    window.addEventListener("resize", () => this.resize());
    this.renderer.setAnimationLoop(() => this.renderFrame());
  }

  setView(boxes: BoxInstance[], connectors: Connector[]): void {
    const seen = new Set<number>();
    for (const box of boxes) {
      seen.add(box.nid);
      let mesh = this.meshes.get(box.nid);
      if (!mesh) {
        mesh = new THREE.Mesh(
          new THREE.BoxGeometry(1, 1, 1),
          new THREE.MeshLambertMaterial({ transparent: true, opacity: 0.92 }),
        );
        mesh.add(makeLabel(box.category));
        mesh.userData.nid = box.nid;
        this.meshes.set(box.nid, mesh);
        this.boxGroup.add(mesh);
      }
      mesh.position.set(...box.center);
      mesh.scale.set(Math.max(box.size[0], 1e-4), Math.max(box.size[1], 1e-4), Math.max(box.size[2], 1e-4));
      mesh.rotation.set(0, box.yawY, 0);
      const material = mesh.material as THREE.MeshLambertMaterial;
      material.color.set(box.selected ? SELECT_COLOR : box.highlighted ? HIGHLIGHT_COLOR : BOX_COLOR);
      const label = mesh.children[0] as THREE.Sprite;
      label.position.set(0, 0.5 + 0.12 / Math.max(box.size[1], 1e-4), 0);
      label.scale.set(1.2 / Math.max(box.size[0], 1e-4), 0.3 / Math.max(box.size[1], 1e-4), 1);
    }
    for (const [nid, mesh] of this.meshes) {
      if (!seen.has(nid)) {
        this.boxGroup.remove(mesh);
        this.meshes.delete(nid);
      }
    }
    this.edgeGroup.clear();
    if (this.showConnectors) {
      for (const c of connectors) {
        const geo = new THREE.BufferGeometry().setFromPoints([
          new THREE.Vector3(...c.from),
          new THREE.Vector3(...c.to),
        ]);
        this.edgeGroup.add(new THREE.Line(geo, new THREE.LineBasicMaterial({ color: 0x5c6bc0 })));
      }
    }
  }

  toggleConnectors(show: boolean): void {
    this.showConnectors = show;
  }

  private renderFrame(): void {
    const { theta, phi, radius, target } = this.orbit;
    this.camera.position.set(
      target.x + radius * Math.sin(phi) * Math.cos(theta),
      target.y + radius * Math.cos(phi),
      target.z + radius * Math.sin(phi) * Math.sin(theta),
    );
    this.camera.lookAt(target);
    this.renderer.render(this.scene, this.camera);
  }

  private resize(): void {
    const w = this.canvas.clientWidth || this.canvas.width;
    const h = this.canvas.clientHeight || this.canvas.height;
    this.renderer.setSize(w, h, false);
    this.camera.aspect = w / Math.max(h, 1);
    this.camera.updateProjectionMatrix();
  }

  private bindInput(): void {
    this.canvas.addEventListener("pointerdown", (ev) => {
      const hit = this.pick(ev);
      if (hit !== null && ev.button === 0 && !ev.shiftKey) {
        this.callbacks.onPick(hit);
        const ground = this.groundPoint(ev);
        if (ground) this.dragging = { nid: hit, last: ground };
      } else if (ev.button === 0) {
        if (hit === null) this.callbacks.onPick(null);
        this.rotating = true;
      }
    });
    this.canvas.addEventListener("pointermove", (ev) => {
      if (this.dragging) {
        const ground = this.groundPoint(ev);
        if (ground) {
          const dx = ground.x - this.dragging.last.x;
          const dz = ground.z - this.dragging.last.z;
          this.dragging.last = ground;
          this.dragging.pending = true;
          this.dragging.accum = this.dragging.accum
            ? [this.dragging.accum[0] + dx, this.dragging.accum[1] + dz]
            : [dx, dz];
        }
      } else if (this.rotating) {
        this.orbit.theta += ev.movementX * 0.008;
        this.orbit.phi = Math.min(Math.max(this.orbit.phi - ev.movementY * 0.008, 0.15), Math.PI / 2 - 0.02);
      }
    });
    const endDrag = () => {
      if (this.dragging?.accum) {
        const [dx, dz] = this.dragging.accum;
        this.callbacks.onDrag(renderGroundDeltaToEngine(dx, dz));
      }
      if (this.rotating) this.notifyOrbit();
      this.dragging = null;
      this.rotating = false;
    };
    this.canvas.addEventListener("pointerup", endDrag);
    this.canvas.addEventListener("pointerleave", endDrag);
    this.canvas.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      this.orbit.radius = Math.min(Math.max(this.orbit.radius * (1 + ev.deltaY * 0.001), 1.5), 60);
      this.notifyOrbit();
    });
  }

  setOrbit(camera: { theta: number; phi: number; radius: number }): void {
    this.orbit.theta = camera.theta;
    this.orbit.phi = camera.phi;
    this.orbit.radius = camera.radius;
  }

  private notifyOrbit(): void {
    this.callbacks.onOrbitChange?.({
      theta: this.orbit.theta,
      phi: this.orbit.phi,
      radius: this.orbit.radius,
    });
  }

  private pointerNdc(ev: PointerEvent): THREE.Vector2 {
    const rect = this.canvas.getBoundingClientRect();
    return new THREE.Vector2(
      ((ev.clientX - rect.left) / rect.width) * 2 - 1,
      -((ev.clientY - rect.top) / rect.height) * 2 + 1,
    );
  }

  private pick(ev: PointerEvent): number | null {
    this.raycaster.setFromCamera(this.pointerNdc(ev), this.camera);
    const hits = this.raycaster.intersectObjects([...this.meshes.values()], false);
    const first = hits[0];
    return first ? (first.object.userData.nid as number) : null;
  }

  private groundPoint(ev: PointerEvent): THREE.Vector3 | null {
    this.raycaster.setFromCamera(this.pointerNdc(ev), this.camera);
    const plane = new THREE.Plane(new THREE.Vector3(0, 1, 0), 0);
    const out = new THREE.Vector3();
    return this.raycaster.ray.intersectPlane(plane, out) ? out : null;
  }
}

interface DragState {
  nid: number;
  last: THREE.Vector3;
  pending?: boolean;
  accum?: [number, number];
}

function makeLabel(text: string): THREE.Sprite {
  const canvas = document.createElement("canvas");
  canvas.width = 256;
  canvas.height = 64;
  const ctx = canvas.getContext("2d");
  if (ctx) {
    ctx.fillStyle = "rgba(10, 12, 16, 0.65)";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    ctx.font = "32px system-ui, sans-serif";
    ctx.fillStyle = "#e8edf2";
    ctx.textAlign = "center";
    ctx.textBaseline = "middle";
    ctx.fillText(text, canvas.width / 2, canvas.height / 2);
  }
  const sprite = new THREE.Sprite(
    new THREE.SpriteMaterial({ map: new THREE.CanvasTexture(canvas), depthTest: false }),
  );
  return sprite;
}
