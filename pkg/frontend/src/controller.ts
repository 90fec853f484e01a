// High-level viewer operations: create a session, select an anchor, expand
// the scene around it, nudge poses. Works purely on the API client and the
// store, so it runs equally under three.js or a headless test harness.

import { ApiError, type SceneApi } from "./api.js";
import { sceneNids, sceneToBoxes, strongConnectors } from "./scene-model.js";
import { EMPTY_VIEW, ViewStore } from "./state.js";
import type { SceneDoc, Vec3 } from "./types.js";

export interface ControllerOptions {
  pollMs?: number; // cadence while a step is in flight
  seed?: number;
}

export type NudgeOutcome = "applied" | "conflict" | "ignored";

export class ViewerController {
  private readonly pollMs: number;
  private scene: SceneDoc | null = null;
  private highlight = new Set<number>();
  private pollTimer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly api: SceneApi,
    readonly store: ViewStore,
    private readonly opts: ControllerOptions = {},
  ) {
    this.pollMs = opts.pollMs ?? 250;
  }

  /** Scene document of the last completed refresh (server truth). */
  currentScene(): SceneDoc | null {
    return this.scene;
  }

  async createSession(text: string, seed?: number): Promise<void> {
    if (!text.trim()) {
      this.store.update({ error: "scene text must not be empty" });
      return;
    }
    await this.store.enqueue(async () => {
      this.store.update({ busy: true, error: null });
      try {
        const created = await this.api.createSession(text, seed ?? this.opts.seed);
        this.store.update({ sessionId: created.sessionId, selection: null });
        this.highlight = new Set(created.scene.nodes.map((n) => n.nid));
        await this.refresh();
      } catch (err) {
        this.fail(err);
      } finally {
        this.store.update({ busy: false });
      }
    });
  }

  /** Selection must reference a nid in the last fetched scene. */
  select(nid: number | null): void {
    if (nid !== null && (!this.scene || !sceneNids(this.scene).has(nid))) return;
    this.store.update({ selection: nid });
    this.rebuildView();
  }

  selectByCategory(category: string): number | null {
    if (!this.scene) return null;
    const match = this.scene.nodes
      .filter((n) => n.category === category)
      .sort((a, b) => a.nid - b.nid)[0];
    if (!match) return null;
    this.select(match.nid);
    return match.nid;
  }

  /**
   * Expand the scene around the selected anchor. Returns false when
   * client-side validation blocked the request (no selection, empty text).
   */
  async expandStep(text: string): Promise<boolean> {
    const { sessionId, selection } = this.store.get();
    if (!sessionId || selection === null || !text.trim()) {
      this.store.update({ error: !text.trim() ? "refinement text must not be empty" : "select an anchor object first" });
      return false;
    }
    await this.store.enqueue(async () => {
      this.store.update({ busy: true, error: null });
      this.startPolling(sessionId);
      try {
        const step = await this.api.postStep(sessionId, selection, text);
        this.highlight = new Set(step.newNids);
        await this.refresh();
      } catch (err) {
        this.fail(err);
      } finally {
        this.stopPolling();
        this.store.update({ busy: false });
      }
    });
    return true;
  }

  /**
   * Move the selected node by a ground-plane delta (engine frame). The
   * server propagates the edit and re-optimizes; a 409 (concurrent edit)
   * triggers a silent re-fetch and reports "conflict" so the UI can offer
   * to re-apply.
   */
  async nudgePose(delta: [number, number]): Promise<NudgeOutcome> {
    const { sessionId, selection, lastRevision } = this.store.get();
    if (!sessionId || selection === null || !this.scene) return "ignored";
    const node = this.scene.nodes.find((n) => n.nid === selection);
    if (!node) return "ignored";
    const newPos: Vec3 = [node.pos[0] + delta[0], node.pos[1] + delta[1], node.pos[2]];
    return this.store.enqueue(async (): Promise<NudgeOutcome> => {
      this.store.update({ busy: true, error: null });
      try {
        await this.api.patchNode(sessionId, selection, { pos: newPos }, lastRevision);
        await this.refresh();
        return "applied";
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          await this.refresh();
          return "conflict";
        }
        this.fail(err);
        return "ignored";
      } finally {
        this.store.update({ busy: false });
      }
    });
  }

  async deleteSelection(cascade = false): Promise<void> {
    const { sessionId, selection } = this.store.get();
    if (!sessionId || selection === null) return;
    await this.store.enqueue(async () => {
      this.store.update({ busy: true, error: null });
      try {
        await this.api.deleteNode(sessionId, selection, cascade);
        this.store.update({ selection: null });
        await this.refresh();
      } catch (err) {
        this.fail(err);
      } finally {
        this.store.update({ busy: false });
      }
    });
  }

  /** Pull scene + graph + report and rebuild the renderable view model. */
  async refresh(): Promise<void> {
    const { sessionId } = this.store.get();
    if (!sessionId) {
      this.scene = null;
      this.store.update({ view: EMPTY_VIEW, lastRevision: 0 });
      return;
    }
    const [scene, graph, report] = await Promise.all([
      this.api.getScene(sessionId),
      this.api.getGraph(sessionId),
      this.api.getReport(sessionId),
    ]);
    this.scene = scene;
    let selection = this.store.get().selection;
    if (selection !== null && !sceneNids(scene).has(selection)) selection = null;
    this.store.update({
      selection,
      lastRevision: graph.revision,
      view: {
        boxes: sceneToBoxes(scene, this.highlight, selection),
        connectors: strongConnectors(scene),
        revision: graph.revision,
        stepSummaries: report.steps,
        lastReport: report.last,
        violations: graph.onViolations,
        warnings: report.steps.flatMap((s) => s.warnings),
      },
    });
  }

  private rebuildView(): void {
    if (!this.scene) return;
    const { selection, view } = this.store.get();
    this.store.update({
      view: { ...view, boxes: sceneToBoxes(this.scene, this.highlight, selection) },
    });
  }

  private startPolling(sessionId: string): void {
    if (this.pollTimer !== null) return;
    this.pollTimer = setInterval(() => {
      this.api
        .getSession(sessionId)
        .then((s) => this.store.update({ lastRevision: s.revision }))
        .catch(() => undefined); // transient poll errors are not surfaced
    }, this.pollMs);
  }

  private stopPolling(): void {
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }

  private fail(err: unknown): void {
    const message = err instanceof Error ? err.message : String(err);
    this.store.update({ error: message });
  }
}
