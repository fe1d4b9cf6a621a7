import { ApiClient } from "./api.js";
import { SessionStore } from "./state.js";
import { TableView } from "./views/table.js";
import { HeatmapView } from "./views/heatmap.js";
import { ScatterView } from "./views/scatter.js";
import { ConstraintPanel } from "./views/constraints.js";
import { PlaygroundView } from "./views/playground.js";
import { StatsView } from "./views/stats.js";

/** Server base URL: ?api=... query parameter, else same origin. */
function resolveBaseUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  return (fromQuery ?? window.location.origin).replace(/\/$/, "");
}

export function bootstrap(container: HTMLElement): void {
  const api = new ApiClient(resolveBaseUrl());
  const store = new SessionStore();

  const upload = document.createElement("div");
  upload.className = "upload-zone";
  const fileInput = document.createElement("input");
  fileInput.type = "file";
  fileInput.accept = ".csv,text/csv";
  const hint = document.createElement("p");
  hint.textContent = "load a CSV to start a session";
  upload.append(hint, fileInput);
  container.append(upload);

  fileInput.addEventListener("change", async () => {
    const file = fileInput.files?.[0];
    if (!file) return;
    const created = await api.createSession(await file.text());
    store.sessionId = created.session_id;
    store.metadata = created.table;
    upload.remove();
    buildWorkspace(container, api, store);
  });
}

function buildWorkspace(container: HTMLElement, api: ApiClient, store: SessionStore): void {
  const table = new TableView(api, store);
  const heatmap = new HeatmapView(api, store);
  const scatter = new ScatterView(api, store);
  const constraints = new ConstraintPanel(store);
  const playground = new PlaygroundView(api, store, scatter, constraints);
  const stats = new StatsView(api, store);
  stats.populateFeatures();

  const left = document.createElement("div");
  left.className = "column";
  left.append(table.root, stats.root);
  const right = document.createElement("div");
  right.className = "column";
  right.append(scatter.root, heatmap.root, playground.root, constraints.root);
  const grid = document.createElement("div");
  grid.className = "workspace";
  grid.append(left, right);
  container.append(grid);

  // feed the constraint histograms from the loaded view
  void api.tablePage(store.sessionId, { limit: 10000 }).then((page) => {
    const columns = new Map<string, number[]>();
    for (const name of store.numericFeatureNames()) {
      columns.set(
        name,
        page.rows.map((r) => Number(r.features[name])).filter((v) => Number.isFinite(v)),
      );
    }
    constraints.setColumnValues(columns);
  });

  void table.refresh();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  bootstrap(document.getElementById("app")!);
}
