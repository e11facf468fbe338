// Thin typed wrapper over the service endpoints. fetch is injectable so
// tests can script the whole backend.

import type {
  AnalysisOptions,
  EnabledEntry,
  FireResponse,
  NetDocument,
  SpaceReportJson,
  StateResponse,
} from "./types";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
    readonly path?: string,
  ) {
    super(path ? `${code} at ${path}: ${detail}` : `${code}: ${detail}`);
    this.name = "ServiceError";
  }
}

export class ServiceClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(method: string, path: string, body?: unknown): Promise<Response> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
      init.headers = { "Content-Type": "application/json" };
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let code = `HTTP ${response.status}`;
      let detail = response.statusText;
      let errorPath: string | undefined;
      try {
        const payload = (await response.json()) as Record<string, unknown>;
        if (typeof payload.error === "string") code = payload.error;
        if (typeof payload.detail === "string") detail = payload.detail;
        if (typeof payload.path === "string") errorPath = payload.path;
      } catch {
        // non-JSON error body; keep the HTTP status text
      }
      throw new ServiceError(response.status, code, detail, errorPath);
    }
    return response;
  }

  private async json<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.request(method, path, body);
    return (await response.json()) as T;
  }

  async createSession(doc: NetDocument): Promise<string> {
    const created = await this.json<{ sessionId: string }>("POST", "/sessions", doc);
    return created.sessionId;
  }

  state(id: string): Promise<StateResponse> {
    return this.json("GET", `/sessions/${id}/state`);
  }

  enabled(id: string): Promise<EnabledEntry[]> {
    return this.json("GET", `/sessions/${id}/enabled`);
  }

  fire(id: string, transition: string, binding?: Record<string, unknown>): Promise<FireResponse> {
    const body: Record<string, unknown> = { transition };
    if (binding !== undefined) body.binding = binding;
    return this.json("POST", `/sessions/${id}/fire`, body);
  }

  advance(id: string): Promise<{ globalClock: number }> {
    return this.json("POST", `/sessions/${id}/advance`);
  }

  undo(id: string): Promise<unknown> {
    return this.json("POST", `/sessions/${id}/undo`);
  }

  reset(id: string): Promise<unknown> {
    return this.json("POST", `/sessions/${id}/reset`);
  }

  analysis(id: string, options: AnalysisOptions = {}): Promise<SpaceReportJson> {
    const query = new URLSearchParams();
    if (options.maxStates !== undefined) query.set("maxStates", String(options.maxStates));
    if (options.maxEdges !== undefined) query.set("maxEdges", String(options.maxEdges));
    if (options.stripTime) query.set("stripTime", "true");
    const suffix = query.size > 0 ? `?${query.toString()}` : "";
    return this.json("GET", `/sessions/${id}/analysis${suffix}`);
  }

  /** Raw body text so a download is byte-identical to the response. */
  async exportText(id: string): Promise<string> {
    const response = await this.request("GET", `/sessions/${id}/export`);
    return response.text();
  }
}
