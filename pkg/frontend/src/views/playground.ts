import type { BackendApi } from "../api.js";
import { SessionStore } from "../state.js";
import { DragThrottler } from "../throttle.js";
import { deltaColor, deltaKind } from "../colors.js";
import { formatNumber } from "./table.js";
import type { ScatterView } from "./scatter.js";
import type { ConstraintPanel } from "./constraints.js";
import type { BackwardResponseJson } from "../types.js";

interface BackwardRequest {
  point: Record<string, number>;
  deltaY: [number, number];
}

/**
 * Playground: copy a data point into a proxy, nudge its features with
 * sliders (live forward projection), toggle the prolines overlay, and drag
 * the proxy node to solve backward projections per drag tick.
 *
 * Drag requests go through a 30 ms throttler with in-flight superseding;
 * the per-feature delta readouts always show the last response verbatim
 * (the raw value is kept in data-delta, colored red/green/gray).
 */
export class PlaygroundView {
  readonly root: HTMLElement;
  proxy: Record<string, number> | null = null;
  proxyRowId: string | null = null;
  lastResponse: BackwardResponseJson | null = null;
  prolinesVisible = false;

  private readonly throttler: DragThrottler<BackwardRequest, BackwardResponseJson>;
  private sliderBox!: HTMLElement;
  private deltaBox!: HTMLElement;
  private statusBox!: HTMLElement;
  private prolineToggle!: HTMLInputElement;

  constructor(
    private readonly api: BackendApi,
    private readonly store: SessionStore,
    private readonly scatter: ScatterView,
    private readonly constraints: ConstraintPanel,
    minIntervalMs = 30,
    now?: () => number,
  ) {
    this.root = document.createElement("section");
    this.root.className = "playground-view";
    this.buildChrome();
    this.throttler = new DragThrottler(
      (req) =>
        this.api.backward(
          this.store.sessionId,
          req.point,
          req.deltaY,
          this.constraints.toJson(),
        ),
      (res) => this.renderBackward(res),
      minIntervalMs,
      now,
    );
    scatter.onProxyDrag = (y) => this.dragTo(y);
    scatter.onPointActivated = (rowId) => void this.copyPoint(rowId);
    store.on("revision", () => this.reset());
    store.on("projection", () => this.reset());
  }

  private buildChrome(): void {
    const bar = document.createElement("div");
    bar.className = "playground-toolbar";
    const hint = document.createElement("span");
    hint.textContent = "double-click a point to copy it into the playground";
    this.prolineToggle = document.createElement("input");
    this.prolineToggle.type = "checkbox";
    this.prolineToggle.id = "proline-toggle";
    this.prolineToggle.addEventListener("change", () => void this.toggleProlines());
    const toggleLabel = document.createElement("label");
    toggleLabel.htmlFor = "proline-toggle";
    toggleLabel.textContent = "prolines";
    bar.append(hint, this.prolineToggle, toggleLabel);

    this.statusBox = document.createElement("div");
    this.statusBox.className = "playground-status";
    this.sliderBox = document.createElement("div");
    this.sliderBox.className = "feature-sliders";
    this.deltaBox = document.createElement("div");
    this.deltaBox.className = "delta-readouts";
    this.root.append(bar, this.statusBox, this.sliderBox, this.deltaBox);
  }

  /** Copy an existing data point into an ephemeral proxy (never mutates). */
  async copyPoint(rowId: string): Promise<void> {
    const projection = this.store.projection;
    if (!projection || !this.store.projectionFresh) return;
    const index = projection.row_ids.indexOf(rowId);
    if (index < 0) return;
    const forward = await this.api.forward(this.store.sessionId, rowId, {});
    this.proxyRowId = rowId;
    this.proxy = await this.resolvePoint(rowId);
    this.scatter.placeProxy(forward.y);
    this.statusBox.textContent = `proxy of ${rowId}`;
    this.renderSliders();
    if (this.prolinesVisible) await this.toggleProlines(true);
  }

  private async resolvePoint(rowId: string): Promise<Record<string, number>> {
    const projection = this.store.projection!;
    const page = await this.api.tablePage(this.store.sessionId, { limit: 10000 });
    const row = page.rows.find((r) => r.id === rowId);
    const point: Record<string, number> = {};
    for (const name of projection.model.feature_names) {
      point[name] = Number(row?.features[name] ?? 0);
    }
    return point;
  }

  /** Feature sliders: each input issues a live forward projection. */
  private renderSliders(): void {
    this.sliderBox.replaceChildren();
    if (!this.proxy) return;
    const names = this.store.projection?.model.feature_names ?? [];
    for (const name of names) {
      const meta = this.store.metadata?.features.find((f) => f.name === name);
      const row = document.createElement("div");
      row.className = "slider-row";
      const label = document.createElement("label");
      label.textContent = name;
      const slider = document.createElement("input");
      slider.type = "range";
      slider.dataset.feature = name;
      const lo = meta?.min ?? this.proxy[name] - 1;
      const hi = meta?.max ?? this.proxy[name] + 1;
      slider.min = String(lo);
      slider.max = String(hi);
      slider.step = String((hi - lo) / 200 || 1);
      slider.value = String(this.proxy[name]);
      const readout = document.createElement("span");
      readout.textContent = formatNumber(this.proxy[name]);
      slider.addEventListener("input", () => {
        readout.textContent = formatNumber(Number(slider.value));
        void this.sliderMoved(name, Number(slider.value));
      });
      row.append(label, slider, readout);
      this.sliderBox.append(row);
    }
  }

  /** Live forward projection while a feature slider moves. */
  async sliderMoved(feature: string, value: number): Promise<void> {
    if (!this.proxy) return;
    const delta = { [feature]: value - this.proxy[feature] };
    const resp = await this.api.forward(this.store.sessionId, this.proxy, delta);
    if (resp.revision !== this.store.revision) return;
    this.scatter.moveProxy(resp.new_y);
  }

  async toggleProlines(force?: boolean): Promise<void> {
    this.prolinesVisible = force ?? this.prolineToggle.checked;
    if (!this.prolinesVisible || !this.proxy) {
      this.scatter.clearProlines();
      return;
    }
    const resp = await this.api.prolines(this.store.sessionId, this.proxy);
    if (resp.revision !== this.store.revision) return;
    this.scatter.drawProlines(resp.prolines); // already ranked by length
  }

  /** One drag tick: submit the displacement through the throttler. */
  dragTo(target: [number, number]): void {
    if (!this.proxy) return;
    const projection = this.store.projection;
    if (!projection || !this.store.projectionFresh) return;
    const index = this.proxyRowId ? projection.row_ids.indexOf(this.proxyRowId) : -1;
    const origin = index >= 0 ? projection.coords[index] : [0, 0];
    this.throttler.submit({
      point: this.proxy,
      deltaY: [target[0] - origin[0], target[1] - origin[1]],
    });
  }

  /** Render the per-feature deltas of a backward response, verbatim. */
  renderBackward(res: BackwardResponseJson): void {
    if (res.revision !== this.store.revision) return;
    this.lastResponse = res;
    this.deltaBox.replaceChildren();
    const fixed = this.constraints.fixedFeatures();
    const status = document.createElement("div");
    status.className = "solver-status";
    status.dataset.status = res.status;
    status.textContent =
      res.status === "optimal"
        ? `optimal (kkt ${res.kkt_residual?.toExponential(1) ?? "?"})`
        : res.status;
    this.deltaBox.append(status);
    if (res.status === "infeasible") return;
    for (const [name, value] of Object.entries(res.delta_x)) {
      const row = document.createElement("div");
      row.className = "delta-row";
      row.dataset.feature = name;
      row.dataset.delta = String(value); // exact response value
      row.dataset.kind = deltaKind(value, fixed.has(name));
      row.style.color = deltaColor(value, fixed.has(name));
      const label = document.createElement("span");
      label.textContent = name;
      const amount = document.createElement("span");
      amount.className = "delta-amount";
      amount.textContent = `${value > 0 ? "+" : ""}${formatNumber(value)}`;
      row.append(label, amount);
      this.deltaBox.append(row);
    }
  }

  /** Readout rows currently colored as changed (not gray). */
  changedReadouts(): string[] {
    return [
      ...this.deltaBox.querySelectorAll<HTMLElement>(
        '.delta-row[data-kind="increase"], .delta-row[data-kind="decrease"]',
      ),
    ].map((el) => el.dataset.feature!);
  }

  private reset(): void {
    this.proxy = null;
    this.proxyRowId = null;
    this.lastResponse = null;
    this.scatter.removeProxy();
    this.scatter.clearProlines();
    this.sliderBox.replaceChildren();
    this.deltaBox.replaceChildren();
    this.statusBox.textContent = "";
  }
}
