// View state store. The UI never mutates scene content locally: every pose
// and box here was produced from a server response, and mutating requests on
// a session are serialized through a single promise chain.

import type { BoxInstance, Connector } from "./scene-model.js";
import type { ReportJson, StepSummary } from "./types.js";

export interface ViewModel {
  boxes: BoxInstance[];
  connectors: Connector[];
  revision: number;
  stepSummaries: StepSummary[];
  lastReport: ReportJson | null;
  violations: [number, number][];
  warnings: string[];
}

export interface OrbitCamera {
  theta: number;
  phi: number;
  radius: number;
}

export interface PanelVisibility {
  scene3D: boolean;
  graphPanel: boolean;
  reportPanel: boolean;
}

export interface ViewState {
  sessionId: string | null;
  lastRevision: number;
  selection: number | null;
  busy: boolean;
  error: string | null;
  camera: OrbitCamera;
  panels: PanelVisibility;
  view: ViewModel;
}

export const EMPTY_VIEW: ViewModel = {
  boxes: [],
  connectors: [],
  revision: 0,
  stepSummaries: [],
  lastReport: null,
  violations: [],
  warnings: [],
};

export type Listener = (state: ViewState) => void;

export class ViewStore {
  private state: ViewState = {
    sessionId: null,
    lastRevision: 0,
    selection: null,
    busy: false,
    error: null,
    camera: { theta: Math.PI / 4, phi: Math.PI / 3.2, radius: 9 },
    panels: { scene3D: true, graphPanel: true, reportPanel: true },
    view: EMPTY_VIEW,
  };
  private listeners: Listener[] = [];
  private chain: Promise<unknown> = Promise.resolve();

  get(): ViewState {
    return this.state;
  }

  update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const l of this.listeners) l(this.state);
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    listener(this.state);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  /**
   * Run a mutating operation after every previously enqueued one finished
   * (mirrors the server's per-session serialization). A second rapid click
   * therefore waits for the first.
   */
  enqueue<T>(op: () => Promise<T>): Promise<T> {
    const run = this.chain.then(op, op);
    this.chain = run.catch(() => undefined);
    return run;
  }
}
