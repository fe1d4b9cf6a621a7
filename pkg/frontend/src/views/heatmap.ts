import type { BackendApi } from "../api.js";
import { SessionStore } from "../state.js";
import { heatColor } from "../colors.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const CELL_W = 46;
const CELL_H = 18;
const LABEL_W = 120;
const HEADER_H = 34;

/**
 * Clustering heatmap: rows are features, columns are clusters ordered
 * left-to-right by descending size (the server pre-orders the profile).
 * The model panel (method/distance/linkage/seed) and the k slider refit
 * on change.
 */
export class HeatmapView {
  readonly root: HTMLElement;
  readonly kSlider: HTMLInputElement;
  readonly kReadout: HTMLElement;
  private methodSelect!: HTMLSelectElement;
  private distanceSelect!: HTMLSelectElement;
  private linkageSelect!: HTMLSelectElement;
  private canvas: SVGSVGElement;

  constructor(
    private readonly api: BackendApi,
    private readonly store: SessionStore,
  ) {
    this.root = document.createElement("section");
    this.root.className = "heatmap-view";

    const panel = document.createElement("div");
    panel.className = "model-panel";

    this.methodSelect = makeSelect(["kmeans", "agglomerative"]);
    this.distanceSelect = makeSelect(["euclidean", "manhattan", "cosine", "correlation"]);
    this.linkageSelect = makeSelect(["average", "single", "complete", "ward"]);

    this.kSlider = document.createElement("input");
    this.kSlider.type = "range";
    this.kSlider.min = "1";
    this.kSlider.max = "12";
    this.kSlider.value = "3";
    this.kSlider.className = "k-slider";
    this.kReadout = document.createElement("span");
    this.kReadout.textContent = "k=3";
    this.kSlider.addEventListener("input", () => {
      this.kReadout.textContent = `k=${this.kSlider.value}`;
    });
    this.kSlider.addEventListener("change", () => void this.refit());

    const fit = document.createElement("button");
    fit.textContent = "recompute";
    fit.addEventListener("click", () => void this.refit());

    panel.append(
      this.methodSelect,
      this.distanceSelect,
      this.linkageSelect,
      this.kSlider,
      this.kReadout,
      fit,
    );

    this.canvas = document.createElementNS(SVG_NS, "svg");
    this.canvas.classList.add("heatmap-canvas");
    this.root.append(panel, this.canvas);

    store.on("clustering", () => this.render());
    store.on("revision", () => this.markStale());
  }

  async refit(): Promise<void> {
    const resp = await this.api.fitClustering(this.store.sessionId, {
      method: this.methodSelect.value,
      k: Number(this.kSlider.value),
      distance: this.distanceSelect.value,
      linkage:
        this.methodSelect.value === "agglomerative"
          ? this.linkageSelect.value
          : undefined,
      seed: 0,
    });
    this.store.acceptClustering(resp);
  }

  private markStale(): void {
    this.canvas.classList.toggle("stale", !this.store.clusteringFresh);
  }

  render(): void {
    const clustering = this.store.clustering;
    this.canvas.replaceChildren();
    if (!clustering) return;
    const { features, cluster_ids, sizes, matrix } = clustering.profile;

    this.canvas.setAttribute(
      "viewBox",
      `0 0 ${LABEL_W + cluster_ids.length * CELL_W} ${HEADER_H + features.length * CELL_H}`,
    );
    this.canvas.setAttribute("width", String(LABEL_W + cluster_ids.length * CELL_W));
    this.canvas.setAttribute("height", String(HEADER_H + features.length * CELL_H));

    cluster_ids.forEach((cid, col) => {
      const header = document.createElementNS(SVG_NS, "text");
      header.classList.add("heatmap-col-header");
      header.dataset.clusterId = String(cid);
      header.dataset.size = String(sizes[col]);
      header.setAttribute("x", String(LABEL_W + col * CELL_W + CELL_W / 2));
      header.setAttribute("y", String(HEADER_H - 8));
      header.setAttribute("text-anchor", "middle");
      header.textContent = `c${cid} (${sizes[col]})`;
      this.canvas.append(header);
    });

    features.forEach((name, row) => {
      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String(LABEL_W - 6));
      label.setAttribute("y", String(HEADER_H + row * CELL_H + CELL_H - 5));
      label.setAttribute("text-anchor", "end");
      label.textContent = name;
      this.canvas.append(label);

      cluster_ids.forEach((cid, col) => {
        const cell = document.createElementNS(SVG_NS, "rect");
        cell.classList.add("heatmap-cell");
        cell.dataset.feature = name;
        cell.dataset.clusterId = String(cid);
        cell.dataset.value = String(matrix[row][col]);
        cell.setAttribute("x", String(LABEL_W + col * CELL_W));
        cell.setAttribute("y", String(HEADER_H + row * CELL_H));
        cell.setAttribute("width", String(CELL_W - 1));
        cell.setAttribute("height", String(CELL_H - 1));
        cell.setAttribute("fill", heatColor(matrix[row][col]));
        this.canvas.append(cell);
      });
    });
    this.markStale();
  }

  /** Column order currently rendered (cluster ids, left to right). */
  renderedColumnOrder(): number[] {
    return [...this.canvas.querySelectorAll<SVGTextElement>(".heatmap-col-header")].map(
      (el) => Number(el.dataset.clusterId),
    );
  }

  renderedColumnSizes(): number[] {
    return [...this.canvas.querySelectorAll<SVGTextElement>(".heatmap-col-header")].map(
      (el) => Number(el.dataset.size),
    );
  }
}

function makeSelect(options: string[]): HTMLSelectElement {
  const select = document.createElement("select");
  for (const value of options) {
    const option = document.createElement("option");
    option.value = value;
    option.textContent = value;
    select.append(option);
  }
  return select;
}
