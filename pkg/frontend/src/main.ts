// Viewer bootstrap: wire API client, store, controller, renderer, panels.

import { ApiClient } from "./api.js";
import { ViewerController } from "./controller.js";
import { Panels } from "./panels.js";
import { SceneRenderer } from "./renderer.js";
import { ViewStore } from "./state.js";

const api = new ApiClient(resolveApiBase());
const store = new ViewStore();
const controller = new ViewerController(api, store);
const panels = new Panels();

const canvas = document.getElementById("scene-canvas") as HTMLCanvasElement;
const renderer = new SceneRenderer(canvas, {
  onPick: (nid) => controller.select(nid),
  onDrag: (delta) => {
    void controller.nudgePose(delta);
  },
  onOrbitChange: (camera) => store.update({ camera }),
});
renderer.setOrbit(store.get().camera);

store.subscribe((state) => {
  renderer.setView(state.view.boxes, state.view.connectors);
  panels.render(state);
});

const sceneText = document.getElementById("scene-text") as HTMLInputElement;
const seedInput = document.getElementById("seed-input") as HTMLInputElement;
const createBtn = document.getElementById("create-btn") as HTMLButtonElement;
const stepText = document.getElementById("step-text") as HTMLInputElement;
const stepBtn = document.getElementById("step-btn") as HTMLButtonElement;
const connectorsToggle = document.getElementById("connectors-toggle") as HTMLInputElement;

createBtn.addEventListener("click", () => {
  const seed = seedInput.value ? Number(seedInput.value) : undefined;
  void controller.createSession(sceneText.value, seed);
});
stepBtn.addEventListener("click", () => {
  void controller.expandStep(stepText.value);
});
connectorsToggle.addEventListener("change", () => {
  renderer.toggleConnectors(connectorsToggle.checked);
  void controller.refresh();
});

document.getElementById("graph-panel")?.addEventListener("click", (ev) => {
  const nid = (ev.target as HTMLElement).dataset?.nid;
  if (nid !== undefined) controller.select(Number(nid));
});

function resolveApiBase(): string {
  // When served from /ui/ by the engine itself, the API lives at the origin.
  return window.location.pathname.startsWith("/ui") ? "" : "http://127.0.0.1:8750";
}
