/** JSON contract of the analysis server. Field names mirror the wire format. */

export interface FeatureMetaJson {
  name: string;
  kind: "numeric" | "categorical";
  mean: number | null;
  std: number | null;
  min: number | null;
  max: number | null;
  missing_count: number;
}

export interface TableMetadataJson {
  n_rows: number;
  n_numeric: number;
  id_name: string | null;
  features: FeatureMetaJson[];
}

export interface SessionCreatedJson {
  session_id: string;
  table: TableMetadataJson;
}

export interface TableRowJson {
  id: string;
  features: Record<string, number | string>;
  label: number | null;
}

export interface TablePageJson {
  revision: number;
  total: number;
  offset: number;
  rows: TableRowJson[];
}

export interface FilterResultJson {
  revision: number;
  match_count: number;
}

export interface ClusteringModelJson {
  method: string;
  k: number;
  params: { distance: string; linkage: string | null; seed: number | null };
  labels: number[];
  centroids: number[][] | null;
  merges: [number, number, number][] | null;
  order: number[];
}

export interface ClusterProfileJson {
  features: string[];
  cluster_ids: number[];
  sizes: number[];
  /** features x clusters, columns already size-ordered */
  matrix: number[][];
}

export interface ClusteringResponseJson {
  revision: number;
  model: ClusteringModelJson;
  profile: ClusterProfileJson;
}

export interface ProjectionModelJson {
  method: string;
  feature_names: string[];
  mu: number[] | null;
  E: number[][] | null;
  eigenvalues: [number, number];
  scale: number[] | null;
}

export interface ProjectionResponseJson {
  revision: number;
  coords: [number, number][];
  row_ids: string[];
  labels: number[] | null;
  model: ProjectionModelJson;
  negative_eigenvalues_clamped: boolean;
}

export interface ForwardResponseJson {
  revision: number;
  y: [number, number];
  delta_y: [number, number];
  new_y: [number, number];
}

export interface ProlineJson {
  feature: string;
  params: number[];
  path: [number, number][];
  length: number;
  degenerate: boolean;
}

export interface ProlinesResponseJson {
  revision: number;
  prolines: ProlineJson[];
}

export interface BackwardResponseJson {
  revision: number;
  status: "optimal" | "infeasible" | "max_iter";
  objective: number | null;
  kkt_residual: number | null;
  delta_x: Record<string, number>;
  new_point: Record<string, number>;
  active_lower: number[];
  active_upper: number[];
}

export interface AnovaResponseJson {
  revision: number;
  F: number | null;
  df1: number;
  df2: number;
  p: number;
  groups: number[];
  grand_mean: number;
  degenerate: boolean;
}

export interface CorrelationEntryJson {
  a: string;
  b: string;
  r: number | null;
  defined: boolean;
}

export interface CorrelationsResponseJson {
  revision: number;
  correlations: CorrelationEntryJson[];
}

/** Constraint payload sent to /backward; feature-name keyed. */
export interface ConstraintsJson {
  equalities: { coeffs: Record<string, number>; rhs: number }[];
  bounds: { feature: string; lb?: number; ub?: number }[];
}

export type PointSpec = string | Record<string, number>;

export interface ApiErrorPayload {
  [key: string]: unknown;
  reason?: string;
  message?: string;
  offset?: number;
}
