import type {
  ClusteringResponseJson,
  ProjectionResponseJson,
  TableMetadataJson,
} from "./types.js";

export type StoreEvent =
  | "selection"
  | "revision"
  | "clustering"
  | "projection"
  | "table-dirty";

type Listener = () => void;

/**
 * Shared UI session state: the revision counter, the cross-view selection
 * set (brushing & linking), and the latest accepted fit responses.
 *
 * Every server response carries the revision it was computed at; responses
 * older than the store's revision are discarded so no view ever renders a
 * mix of revisions.
 */
export class SessionStore {
  sessionId = "";
  metadata: TableMetadataJson | null = null;
  revision = 0;
  selection = new Set<string>();
  clustering: ClusteringResponseJson | null = null;
  projection: ProjectionResponseJson | null = null;

  private listeners = new Map<StoreEvent, Set<Listener>>();

  on(event: StoreEvent, fn: Listener): () => void {
    if (!this.listeners.has(event)) this.listeners.set(event, new Set());
    this.listeners.get(event)!.add(fn);
    return () => this.listeners.get(event)!.delete(fn);
  }

  private emit(event: StoreEvent): void {
    for (const fn of this.listeners.get(event) ?? []) fn();
  }

  /** Advance the view revision (after a filter/feature mutation). */
  bumpRevision(revision: number): void {
    if (revision <= this.revision) return;
    this.revision = revision;
    this.emit("revision");
    this.emit("table-dirty");
  }

  /** True (and stored) iff the response matches the current revision. */
  acceptClustering(resp: ClusteringResponseJson): boolean {
    if (resp.revision !== this.revision) return false;
    this.clustering = resp;
    this.emit("clustering");
    return true;
  }

  acceptProjection(resp: ProjectionResponseJson): boolean {
    if (resp.revision !== this.revision) return false;
    this.projection = resp;
    this.emit("projection");
    return true;
  }

  /** Models fitted at an older revision are stale until refitted. */
  get clusteringFresh(): boolean {
    return this.clustering !== null && this.clustering.revision === this.revision;
  }

  get projectionFresh(): boolean {
    return this.projection !== null && this.projection.revision === this.revision;
  }

  setSelection(ids: Iterable<string>): void {
    this.selection = new Set(ids);
    this.emit("selection");
  }

  clearSelection(): void {
    this.setSelection([]);
  }

  numericFeatureNames(): string[] {
    return (this.metadata?.features ?? [])
      .filter((f) => f.kind === "numeric")
      .map((f) => f.name);
  }
}
