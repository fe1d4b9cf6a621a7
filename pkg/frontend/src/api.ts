import type {
  AnovaResponseJson,
  ApiErrorPayload,
  BackwardResponseJson,
  ClusteringResponseJson,
  ConstraintsJson,
  CorrelationsResponseJson,
  FilterResultJson,
  ForwardResponseJson,
  PointSpec,
  ProjectionResponseJson,
  ProlinesResponseJson,
  SessionCreatedJson,
  TablePageJson,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly payload: ApiErrorPayload,
  ) {
    super(typeof payload.message === "string" ? payload.message : `HTTP ${status}`);
  }

  /** 409s mean a fit is missing or stale for the current view. */
  get isConflict(): boolean {
    return this.status === 409;
  }
}

export interface TablePageQuery {
  offset?: number;
  limit?: number;
  sort_by?: string;
  dir?: "asc" | "desc";
}

/** The slice of the server contract the views depend on (mockable). */
export interface BackendApi {
  createSession(csv: string): Promise<SessionCreatedJson>;
  tablePage(sid: string, query?: TablePageQuery): Promise<TablePageJson>;
  setFilter(sid: string, body: { expr?: string; keyword?: string }): Promise<FilterResultJson>;
  setFeatures(sid: string, names: string[]): Promise<{ revision: number }>;
  fitClustering(
    sid: string,
    body: { method: string; k: number; distance?: string; linkage?: string; seed?: number },
  ): Promise<ClusteringResponseJson>;
  fitProjection(
    sid: string,
    body: { method: string; distance?: string; standardize?: boolean },
  ): Promise<ProjectionResponseJson>;
  forward(
    sid: string,
    point: PointSpec,
    delta: Record<string, number>,
  ): Promise<ForwardResponseJson>;
  prolines(
    sid: string,
    point: PointSpec,
    options?: { k?: number; c?: number; features?: string[] },
  ): Promise<ProlinesResponseJson>;
  backward(
    sid: string,
    point: PointSpec,
    delta_y: [number, number],
    constraints?: ConstraintsJson,
  ): Promise<BackwardResponseJson>;
  anova(sid: string, feature: string, clusterIds: number[]): Promise<AnovaResponseJson>;
  correlations(sid: string): Promise<CorrelationsResponseJson>;
  exportUrl(sid: string): string;
}

/** Thin typed wrapper over the session HTTP API. */
export class ApiClient implements BackendApi {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch.bind(globalThis),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!resp.ok) {
      let payload: ApiErrorPayload = {};
      try {
        payload = (await resp.json()) as ApiErrorPayload;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(resp.status, payload);
    }
    return (await resp.json()) as T;
  }

  async createSession(csv: string): Promise<SessionCreatedJson> {
    const resp = await this.fetchFn(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "content-type": "text/csv" },
      body: csv,
    });
    if (!resp.ok) {
      throw new ApiError(resp.status, (await resp.json()) as ApiErrorPayload);
    }
    return (await resp.json()) as SessionCreatedJson;
  }

  tablePage(sid: string, query: TablePageQuery = {}): Promise<TablePageJson> {
    const params = new URLSearchParams();
    for (const [key, value] of Object.entries(query)) {
      if (value !== undefined) params.set(key, String(value));
    }
    const suffix = params.size > 0 ? `?${params.toString()}` : "";
    return this.request("GET", `/sessions/${sid}/table${suffix}`);
  }

  setFilter(sid: string, body: { expr?: string; keyword?: string }): Promise<FilterResultJson> {
    return this.request("PUT", `/sessions/${sid}/filter`, body);
  }

  setFeatures(sid: string, names: string[]): Promise<{ revision: number }> {
    return this.request("PUT", `/sessions/${sid}/features`, { names });
  }

  fitClustering(
    sid: string,
    body: { method: string; k: number; distance?: string; linkage?: string; seed?: number },
  ): Promise<ClusteringResponseJson> {
    return this.request("POST", `/sessions/${sid}/clustering`, body);
  }

  fitProjection(
    sid: string,
    body: { method: string; distance?: string; standardize?: boolean },
  ): Promise<ProjectionResponseJson> {
    return this.request("POST", `/sessions/${sid}/projection`, body);
  }

  forward(sid: string, point: PointSpec, delta: Record<string, number>): Promise<ForwardResponseJson> {
    return this.request("POST", `/sessions/${sid}/forward`, { point, delta });
  }

  prolines(
    sid: string,
    point: PointSpec,
    options: { k?: number; c?: number; features?: string[] } = {},
  ): Promise<ProlinesResponseJson> {
    return this.request("POST", `/sessions/${sid}/prolines`, { point, ...options });
  }

  backward(
    sid: string,
    point: PointSpec,
    delta_y: [number, number],
    constraints?: ConstraintsJson,
  ): Promise<BackwardResponseJson> {
    return this.request("POST", `/sessions/${sid}/backward`, {
      point,
      delta_y,
      constraints,
    });
  }

  anova(sid: string, feature: string, clusterIds: number[]): Promise<AnovaResponseJson> {
    return this.request("POST", `/sessions/${sid}/stats/anova`, {
      feature,
      cluster_ids: clusterIds,
    });
  }

  correlations(sid: string): Promise<CorrelationsResponseJson> {
    return this.request("GET", `/sessions/${sid}/stats/correlations`);
  }

  exportUrl(sid: string): string {
    return `${this.baseUrl}/sessions/${sid}/export.csv`;
  }
}
