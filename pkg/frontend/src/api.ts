// Typed client for the session HTTP API. The fetch implementation is
// injectable so tests can run it against mocks or a spawned server.

import type {
  CreateSessionResponse,
  DeleteResponse,
  GraphDoc,
  PatchResponse,
  ReportResponse,
  SceneDoc,
  SessionSummary,
  StepResponse,
  Vec3,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: unknown,
  ) {
    super(`HTTP ${status}: ${typeof detail === "string" ? detail : JSON.stringify(detail)}`);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** What the viewer needs from the scene service; see ApiClient for the
 * HTTP implementation. */
export interface SceneApi {
  createSession(text: string, seed?: number): Promise<CreateSessionResponse>;
  getSession(id: string): Promise<SessionSummary>;
  getScene(id: string): Promise<SceneDoc>;
  getGraph(id: string): Promise<GraphDoc>;
  postStep(id: string, anchorNid: number, text: string, seed?: number): Promise<StepResponse>;
  patchNode(id: string, nid: number, body: { pos?: Vec3; rot?: Vec3 }, ifMatch?: number): Promise<PatchResponse>;
  deleteNode(id: string, nid: number, cascade?: boolean): Promise<DeleteResponse>;
  getReport(id: string): Promise<ReportResponse>;
}

export class ApiClient implements SceneApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (...args) => globalThis.fetch(...args),
  ) {}

  createSession(text: string, seed?: number): Promise<CreateSessionResponse> {
    return this.request("POST", "/sessions", { text, ...(seed !== undefined ? { seed } : {}) });
  }

  getSession(id: string): Promise<SessionSummary> {
    return this.request("GET", `/sessions/${id}`);
  }

  getScene(id: string): Promise<SceneDoc> {
    return this.request("GET", `/sessions/${id}/scene`);
  }

  getGraph(id: string): Promise<GraphDoc> {
    return this.request("GET", `/sessions/${id}/graph`);
  }

  postStep(id: string, anchorNid: number, text: string, seed?: number): Promise<StepResponse> {
    return this.request("POST", `/sessions/${id}/steps`, {
      anchorNid,
      text,
      ...(seed !== undefined ? { seed } : {}),
    });
  }

  patchNode(
    id: string,
    nid: number,
    body: { pos?: Vec3; rot?: Vec3 },
    ifMatch?: number,
  ): Promise<PatchResponse> {
    return this.request("PATCH", `/sessions/${id}/nodes/${nid}`, body, ifMatch);
  }

  deleteNode(id: string, nid: number, cascade = false): Promise<DeleteResponse> {
    return this.request("DELETE", `/sessions/${id}/nodes/${nid}?cascade=${cascade}`);
  }

  getReport(id: string): Promise<ReportResponse> {
    return this.request("GET", `/sessions/${id}/report`);
  }

  private async request<T>(method: string, path: string, body?: unknown, ifMatch?: number): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (ifMatch !== undefined) headers["If-Match"] = String(ifMatch);
    let resp: Response;
    try {
      resp = await this.fetchImpl(this.baseUrl + path, {
        method,
        headers,
        body: body !== undefined ? JSON.stringify(body) : undefined,
      });
    } catch (err) {
      throw new ApiError(0, err instanceof Error ? err.message : String(err));
    }
    if (!resp.ok) {
      let detail: unknown = resp.statusText;
      try {
        detail = ((await resp.json()) as { detail?: unknown }).detail ?? detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }
}
