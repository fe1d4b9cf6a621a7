import type { BackendApi } from "../api.js";
import { SessionStore } from "../state.js";
import { clusterColor } from "../colors.js";
import type { ProlineJson } from "../types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 520;
const HEIGHT = 420;
const MARGIN = 30;
const POINT_R = 4;

export interface PlanarScale {
  x(v: number): number;
  y(v: number): number;
  invertX(px: number): number;
  invertY(px: number): number;
}

/**
 * Projection scatter plot: points colored by cluster membership, a
 * rectangular brush that drives the shared selection, an overlay layer
 * for prolines, and a draggable proxy node managed by the playground.
 */
export class ScatterView {
  readonly root: HTMLElement;
  readonly canvas: SVGSVGElement;
  private readonly pointLayer: SVGGElement;
  private readonly overlayLayer: SVGGElement;
  private readonly proxyLayer: SVGGElement;
  private methodSelect: HTMLSelectElement;
  private distanceSelect: HTMLSelectElement;
  private scale: PlanarScale | null = null;

  /** Drag callbacks installed by the playground. */
  onProxyDrag: ((y: [number, number]) => void) | null = null;
  onPointActivated: ((rowId: string) => void) | null = null;

  constructor(
    private readonly api: BackendApi,
    private readonly store: SessionStore,
  ) {
    this.root = document.createElement("section");
    this.root.className = "scatter-view";

    const panel = document.createElement("div");
    panel.className = "model-panel";
    this.methodSelect = document.createElement("select");
    for (const m of ["pca", "cmds"]) {
      const option = document.createElement("option");
      option.value = m;
      option.textContent = m.toUpperCase();
      this.methodSelect.append(option);
    }
    this.distanceSelect = document.createElement("select");
    for (const m of ["euclidean", "manhattan", "cosine", "correlation"]) {
      const option = document.createElement("option");
      option.value = m;
      option.textContent = m;
      this.distanceSelect.append(option);
    }
    const fit = document.createElement("button");
    fit.textContent = "project";
    fit.addEventListener("click", () => void this.refit());
    panel.append(this.methodSelect, this.distanceSelect, fit);

    this.canvas = document.createElementNS(SVG_NS, "svg");
    this.canvas.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
    this.canvas.setAttribute("width", String(WIDTH));
    this.canvas.setAttribute("height", String(HEIGHT));
    this.canvas.classList.add("scatter-canvas");
    this.pointLayer = document.createElementNS(SVG_NS, "g");
    this.overlayLayer = document.createElementNS(SVG_NS, "g");
    this.proxyLayer = document.createElementNS(SVG_NS, "g");
    this.canvas.append(this.pointLayer, this.overlayLayer, this.proxyLayer);
    this.installBrush();

    this.root.append(panel, this.canvas);
    store.on("projection", () => this.render());
    store.on("clustering", () => this.paintColors());
    store.on("selection", () => this.paintSelection());
    store.on("revision", () => this.markStale());
  }

  async refit(): Promise<void> {
    const resp = await this.api.fitProjection(this.store.sessionId, {
      method: this.methodSelect.value,
      distance: this.distanceSelect.value,
    });
    this.store.acceptProjection(resp);
  }

  private markStale(): void {
    this.canvas.classList.toggle("stale", !this.store.projectionFresh);
  }

  /** Data-to-pixel mapping for the current projection extent. */
  planarScale(): PlanarScale | null {
    return this.scale;
  }

  private computeScale(coords: [number, number][]): PlanarScale {
    let xMin = Infinity, xMax = -Infinity, yMin = Infinity, yMax = -Infinity;
    for (const [x, y] of coords) {
      xMin = Math.min(xMin, x);
      xMax = Math.max(xMax, x);
      yMin = Math.min(yMin, y);
      yMax = Math.max(yMax, y);
    }
    if (!(xMax > xMin)) { xMin -= 1; xMax += 1; }
    if (!(yMax > yMin)) { yMin -= 1; yMax += 1; }
    const sx = (WIDTH - 2 * MARGIN) / (xMax - xMin);
    const sy = (HEIGHT - 2 * MARGIN) / (yMax - yMin);
    return {
      x: (v) => MARGIN + (v - xMin) * sx,
      y: (v) => HEIGHT - MARGIN - (v - yMin) * sy, // planar y grows upward
      invertX: (px) => xMin + (px - MARGIN) / sx,
      invertY: (px) => yMin + (HEIGHT - MARGIN - px) / sy,
    };
  }

  render(): void {
    const projection = this.store.projection;
    this.pointLayer.replaceChildren();
    this.overlayLayer.replaceChildren();
    if (!projection) return;
    this.scale = this.computeScale(projection.coords);

    projection.row_ids.forEach((rowId, i) => {
      const [px, py] = projection.coords[i];
      const circle = document.createElementNS(SVG_NS, "circle");
      circle.classList.add("scatter-point");
      circle.dataset.rowId = rowId;
      circle.dataset.index = String(i);
      circle.setAttribute("cx", String(this.scale!.x(px)));
      circle.setAttribute("cy", String(this.scale!.y(py)));
      circle.setAttribute("r", String(POINT_R));
      circle.addEventListener("dblclick", () => this.onPointActivated?.(rowId));
      this.pointLayer.append(circle);
    });
    this.paintColors();
    this.paintSelection();
    this.markStale();
  }

  paintColors(): void {
    const projection = this.store.projection;
    if (!projection) return;
    const clustering = this.store.clustering;
    const fresh =
      clustering !== null && clustering.revision === projection.revision;
    const labels = fresh ? clustering!.model.labels : projection.labels;
    for (const el of this.pointLayer.querySelectorAll<SVGCircleElement>("circle")) {
      const i = Number(el.dataset.index);
      el.setAttribute("fill", clusterColor(labels ? labels[i] ?? null : null));
    }
  }

  private paintSelection(): void {
    for (const el of this.pointLayer.querySelectorAll<SVGCircleElement>("circle")) {
      el.classList.toggle("selected", this.store.selection.has(el.dataset.rowId!));
    }
  }

  private installBrush(): void {
    let start: [number, number] | null = null;
    let rect: SVGRectElement | null = null;
    this.canvas.addEventListener("pointerdown", (ev) => {
      if ((ev.target as Element).classList.contains("proxy-node")) return;
      start = [ev.offsetX, ev.offsetY];
      rect = document.createElementNS(SVG_NS, "rect");
      rect.classList.add("brush-rect");
      this.canvas.append(rect);
    });
    this.canvas.addEventListener("pointermove", (ev) => {
      if (!start || !rect) return;
      const x = Math.min(start[0], ev.offsetX);
      const y = Math.min(start[1], ev.offsetY);
      rect.setAttribute("x", String(x));
      rect.setAttribute("y", String(y));
      rect.setAttribute("width", String(Math.abs(ev.offsetX - start[0])));
      rect.setAttribute("height", String(Math.abs(ev.offsetY - start[1])));
    });
    this.canvas.addEventListener("pointerup", (ev) => {
      if (!start) return;
      const [x0, y0] = start;
      this.selectWithin(
        Math.min(x0, ev.offsetX),
        Math.min(y0, ev.offsetY),
        Math.max(x0, ev.offsetX),
        Math.max(y0, ev.offsetY),
      );
      rect?.remove();
      start = null;
      rect = null;
    });
  }

  /** Brush rectangle in pixel space -> shared selection (linked views). */
  selectWithin(x0: number, y0: number, x1: number, y1: number): void {
    if (Math.abs(x1 - x0) < 3 && Math.abs(y1 - y0) < 3) {
      this.store.clearSelection();
      return;
    }
    const hit: string[] = [];
    for (const el of this.pointLayer.querySelectorAll<SVGCircleElement>("circle")) {
      const cx = Number(el.getAttribute("cx"));
      const cy = Number(el.getAttribute("cy"));
      if (cx >= x0 && cx <= x1 && cy >= y0 && cy <= y1) {
        hit.push(el.dataset.rowId!);
      }
    }
    this.store.setSelection(hit);
  }

  /** Ranked proline paths, rendered under the proxy node. */
  drawProlines(lines: ProlineJson[]): void {
    this.overlayLayer.replaceChildren();
    if (!this.scale) return;
    for (const line of lines) {
      if (line.degenerate) continue;
      const path = document.createElementNS(SVG_NS, "polyline");
      path.classList.add("proline-path");
      path.dataset.feature = line.feature;
      path.setAttribute(
        "points",
        line.path.map(([x, y]) => `${this.scale!.x(x)},${this.scale!.y(y)}`).join(" "),
      );
      this.overlayLayer.append(path);
    }
  }

  clearProlines(): void {
    this.overlayLayer.replaceChildren();
  }

  /** The playground's proxy node (gray square, dashed border). */
  placeProxy(y: [number, number]): SVGRectElement {
    this.proxyLayer.replaceChildren();
    if (!this.scale) throw new Error("no projection rendered");
    const node = document.createElementNS(SVG_NS, "rect");
    node.classList.add("proxy-node");
    const size = 10;
    node.setAttribute("width", String(size));
    node.setAttribute("height", String(size));
    node.setAttribute("x", String(this.scale.x(y[0]) - size / 2));
    node.setAttribute("y", String(this.scale.y(y[1]) - size / 2));
    this.installProxyDrag(node, size);
    this.proxyLayer.append(node);
    return node;
  }

  moveProxy(y: [number, number]): void {
    const node = this.proxyLayer.querySelector<SVGRectElement>(".proxy-node");
    if (!node || !this.scale) return;
    const size = 10;
    node.setAttribute("x", String(this.scale.x(y[0]) - size / 2));
    node.setAttribute("y", String(this.scale.y(y[1]) - size / 2));
  }

  removeProxy(): void {
    this.proxyLayer.replaceChildren();
  }

  private installProxyDrag(node: SVGRectElement, size: number): void {
    let dragging = false;
    node.addEventListener("pointerdown", (ev) => {
      dragging = true;
      ev.stopPropagation();
    });
    this.canvas.addEventListener("pointermove", (ev) => {
      if (!dragging || !this.scale) return;
      node.setAttribute("x", String(ev.offsetX - size / 2));
      node.setAttribute("y", String(ev.offsetY - size / 2));
      this.onProxyDrag?.([
        this.scale.invertX(ev.offsetX),
        this.scale.invertY(ev.offsetY),
      ]);
    });
    this.canvas.addEventListener("pointerup", () => {
      dragging = false;
    });
  }
}
