// Wire types mirroring the scene service's JSON documents.

export type Vec3 = [number, number, number];

export interface NodeJson {
  nid: number;
  category: string;
  pos: Vec3;
  rot: Vec3; // roll, pitch, yaw (radians), engine frame (+Z up)
  scale: number;
  halfExtents: Vec3;
}

export interface EdgeJson {
  src: number;
  dst: number;
  relation: string;
}

export interface RelTransformJson {
  src: number;
  dst: number;
  translation: Vec3;
  yawDelta: number;
  scaleRatio: number;
}

export interface SceneDoc {
  version: string;
  meta: { created: string; seed: number; stepCount: number };
  nodes: NodeJson[];
  edges: EdgeJson[];
  relTransforms: RelTransformJson[];
}

export interface GraphDoc {
  revision: number;
  nodes: NodeJson[];
  edges: EdgeJson[];
  relTransforms: RelTransformJson[];
  strongRoots: number[];
  onViolations: [number, number][];
}

export interface CorrectionJson {
  nid: number;
  delta: Vec3;
  reason: string;
}

export interface ReportJson {
  passes: number;
  converged: boolean;
  corrections: CorrectionJson[];
}

export interface StepResponse {
  stepIndex: number;
  revision: number;
  seed: number;
  newNids: number[];
  nidMap: Record<string, number>;
  report: ReportJson;
  warnings: string[];
}

export interface SessionSummary {
  sessionId: string;
  stepIndex: number;
  revision: number;
  nodeCount: number;
  backendSeed: number;
  created: string;
}

export interface CreateSessionResponse extends SessionSummary {
  scene: SceneDoc;
}

export interface StepSummary {
  stepIndex: number;
  anchorNid: number;
  text: string;
  corrections: number;
  converged: boolean;
  warnings: string[];
}

export interface ReportResponse {
  revision: number;
  steps: StepSummary[];
  last: ReportJson | null;
}

export interface PatchResponse {
  revision: number;
  report: ReportJson;
}

export interface DeleteResponse {
  revision: number;
  removed: number[];
}

/** The strong support relations; matches the engine's vocabulary. */
export const STRONG_RELATIONS = new Set(["on", "inside"]);
