import { SessionStore } from "../src/state.js";
import type { BackendApi } from "../src/api.js";
import type {
  BackwardResponseJson,
  ClusteringResponseJson,
  ProjectionResponseJson,
  TableMetadataJson,
  TablePageJson,
} from "../src/types.js";

export const METADATA: TableMetadataJson = {
  n_rows: 4,
  n_numeric: 3,
  id_name: "id",
  features: [
    { name: "age", kind: "numeric", mean: 40, std: 10, min: 20, max: 60, missing_count: 0 },
    { name: "weight", kind: "numeric", mean: 160, std: 15, min: 120, max: 200, missing_count: 0 },
    { name: "height", kind: "numeric", mean: 170, std: 6, min: 160, max: 184, missing_count: 0 },
  ],
};

export const PROJECTION: ProjectionResponseJson = {
  revision: 0,
  coords: [
    [0.0, 0.0],
    [1.0, 0.5],
    [-1.0, -0.5],
    [0.5, -1.0],
  ],
  row_ids: ["p1", "p2", "p3", "p4"],
  labels: [0, 0, 1, 1],
  model: {
    method: "pca",
    feature_names: ["age", "weight", "height"],
    mu: [40, 160, 170],
    E: [
      [1, 0],
      [0, 1],
      [0, 0],
    ],
    eigenvalues: [2.0, 1.0],
    scale: null,
  },
  negative_eigenvalues_clamped: false,
};

export const TABLE_PAGE: TablePageJson = {
  revision: 0,
  total: 4,
  offset: 0,
  rows: [
    { id: "p1", features: { age: 25, weight: 150, height: 165 }, label: 0 },
    { id: "p2", features: { age: 35, weight: 160, height: 170 }, label: 0 },
    { id: "p3", features: { age: 45, weight: 170, height: 175 }, label: 1 },
    { id: "p4", features: { age: 55, weight: 180, height: 180 }, label: 1 },
  ],
};

export function clusteringResponse(
  sizes: number[],
  revision = 0,
): ClusteringResponseJson {
  const k = sizes.length;
  const order = [...sizes.keys()].sort((a, b) => sizes[b] - sizes[a] || a - b);
  return {
    revision,
    model: {
      method: "kmeans",
      k,
      params: { distance: "euclidean", linkage: null, seed: 0 },
      labels: [],
      centroids: null,
      merges: null,
      order,
    },
    profile: {
      features: ["age", "weight", "height"],
      cluster_ids: order,
      sizes: order.map((c) => sizes[c]),
      matrix: [
        order.map((_, j) => (j + 1) / (k + 1)),
        order.map((_, j) => 1 - (j + 1) / (k + 1)),
        order.map(() => 0.5),
      ],
    },
  };
}

export function backwardResponse(
  deltaX: Record<string, number>,
  revision = 0,
): BackwardResponseJson {
  return {
    revision,
    status: "optimal",
    objective: 0.01,
    kkt_residual: 1e-9,
    delta_x: deltaX,
    new_point: Object.fromEntries(Object.entries(deltaX).map(([k, v]) => [k, v + 1])),
    active_lower: [],
    active_upper: [],
  };
}

type Call = { method: string; args: unknown[] };

export interface MockApi extends BackendApi {
  calls: Call[];
  callsTo(method: string): Call[];
}

/** A BackendApi that records calls and answers from canned responses. */
export function mockApi(overrides: Partial<BackendApi> = {}): MockApi {
  const calls: Call[] = [];
  const record =
    <T>(method: string, respond: (...args: never[]) => T) =>
    (...args: unknown[]) => {
      calls.push({ method, args });
      return respond(...(args as never[]));
    };

  const api = {
    calls,
    callsTo: (method: string) => calls.filter((c) => c.method === method),
    createSession: record("createSession", () =>
      Promise.resolve({ session_id: "s1", table: METADATA }),
    ),
    tablePage: record("tablePage", () => Promise.resolve(TABLE_PAGE)),
    setFilter: record("setFilter", () =>
      Promise.resolve({ revision: 1, match_count: 2 }),
    ),
    setFeatures: record("setFeatures", () => Promise.resolve({ revision: 1 })),
    fitClustering: record("fitClustering", () =>
      Promise.resolve(clusteringResponse([2, 2])),
    ),
    fitProjection: record("fitProjection", () => Promise.resolve(PROJECTION)),
    forward: record("forward", () =>
      Promise.resolve({
        revision: 0,
        y: [0, 0] as [number, number],
        delta_y: [0.1, 0.2] as [number, number],
        new_y: [0.1, 0.2] as [number, number],
      }),
    ),
    prolines: record("prolines", () => Promise.resolve({ revision: 0, prolines: [] })),
    backward: record("backward", () =>
      Promise.resolve(backwardResponse({ age: 1, weight: -1, height: 0 })),
    ),
    anova: record("anova", () =>
      Promise.resolve({
        revision: 0,
        F: 24.0,
        df1: 1,
        df2: 4,
        p: 0.00805,
        groups: [2, 6],
        grand_mean: 4,
        degenerate: false,
      }),
    ),
    correlations: record("correlations", () =>
      Promise.resolve({ revision: 0, correlations: [] }),
    ),
    exportUrl: (sid: string) => `http://test/sessions/${sid}/export.csv`,
    ...overrides,
  };
  return api as MockApi;
}

export function freshStore(): SessionStore {
  const store = new SessionStore();
  store.sessionId = "s1";
  store.metadata = METADATA;
  return store;
}
