import { SessionStore } from "../state.js";
import type { ConstraintsJson } from "../types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const HIST_W = 240;
const HIST_H = 64;
const BINS = 24;

export interface FeatureConstraint {
  fixed: boolean;
  lb: number | null;
  ub: number | null;
}

/**
 * Constraint entry for backward projection: per feature, an equality
 * "fix" toggle plus an interval (bounded, left bounded, or right bounded)
 * entered through a histogram brush or the two sliders.
 */
export class ConstraintPanel {
  readonly root: HTMLElement;
  private readonly state = new Map<string, FeatureConstraint>();
  private values = new Map<string, number[]>();

  constructor(private readonly store: SessionStore) {
    this.root = document.createElement("section");
    this.root.className = "constraint-panel";
    store.on("revision", () => this.rebuild());
  }

  /** Provide raw column values (current view) for the histograms. */
  setColumnValues(values: Map<string, number[]>): void {
    this.values = values;
    this.rebuild();
  }

  get(feature: string): FeatureConstraint {
    if (!this.state.has(feature)) {
      this.state.set(feature, { fixed: false, lb: null, ub: null });
    }
    return this.state.get(feature)!;
  }

  setFixed(feature: string, fixed: boolean): void {
    this.get(feature).fixed = fixed;
    this.paintRow(feature);
  }

  setInterval(feature: string, lb: number | null, ub: number | null): void {
    const entry = this.get(feature);
    entry.lb = lb;
    entry.ub = ub;
    this.paintRow(feature);
  }

  clear(): void {
    this.state.clear();
    this.rebuild();
  }

  fixedFeatures(): Set<string> {
    const out = new Set<string>();
    for (const [name, entry] of this.state) {
      if (entry.fixed) out.add(name);
    }
    return out;
  }

  /** Wire payload for /backward; omitted when nothing is constrained. */
  toJson(): ConstraintsJson | undefined {
    const equalities: ConstraintsJson["equalities"] = [];
    const bounds: ConstraintsJson["bounds"] = [];
    for (const [name, entry] of this.state) {
      if (entry.fixed) {
        equalities.push({ coeffs: { [name]: 1.0 }, rhs: 0.0 });
        continue; // an interval on a pinned feature is moot
      }
      if (entry.lb !== null || entry.ub !== null) {
        const bound: { feature: string; lb?: number; ub?: number } = { feature: name };
        if (entry.lb !== null) bound.lb = entry.lb;
        if (entry.ub !== null) bound.ub = entry.ub;
        bounds.push(bound);
      }
    }
    if (equalities.length === 0 && bounds.length === 0) return undefined;
    return { equalities, bounds };
  }

  rebuild(): void {
    this.root.replaceChildren();
    for (const name of this.store.numericFeatureNames()) {
      this.root.append(this.buildRow(name));
    }
  }

  private buildRow(name: string): HTMLElement {
    const entry = this.get(name);
    const row = document.createElement("div");
    row.className = "constraint-row";
    row.dataset.feature = name;

    const fix = document.createElement("input");
    fix.type = "checkbox";
    fix.className = "fix-toggle";
    fix.checked = entry.fixed;
    fix.addEventListener("change", () => this.setFixed(name, fix.checked));
    const label = document.createElement("label");
    label.textContent = name;

    const meta = this.store.metadata?.features.find((f) => f.name === name);
    const lo = meta?.min ?? 0;
    const hi = meta?.max ?? 1;

    const lbInput = document.createElement("input");
    lbInput.type = "range";
    lbInput.className = "lb-slider";
    lbInput.min = String(lo);
    lbInput.max = String(hi);
    lbInput.step = String((hi - lo) / 100 || 1);
    lbInput.value = String(entry.lb ?? lo);
    const ubInput = document.createElement("input");
    ubInput.type = "range";
    ubInput.className = "ub-slider";
    ubInput.min = String(lo);
    ubInput.max = String(hi);
    ubInput.step = String((hi - lo) / 100 || 1);
    ubInput.value = String(entry.ub ?? hi);

    const lbOn = document.createElement("input");
    lbOn.type = "checkbox";
    lbOn.className = "lb-toggle";
    lbOn.checked = entry.lb !== null;
    const ubOn = document.createElement("input");
    ubOn.type = "checkbox";
    ubOn.className = "ub-toggle";
    ubOn.checked = entry.ub !== null;

    const sync = () => {
      this.setInterval(
        name,
        lbOn.checked ? Number(lbInput.value) : null,
        ubOn.checked ? Number(ubInput.value) : null,
      );
    };
    for (const el of [lbInput, ubInput]) el.addEventListener("change", sync);
    for (const el of [lbOn, ubOn]) el.addEventListener("change", sync);

    const readout = document.createElement("span");
    readout.className = "interval-readout";
    row.append(
      fix,
      label,
      this.buildHistogram(name, lo, hi),
      lbOn,
      lbInput,
      ubOn,
      ubInput,
      readout,
    );
    this.paintRow(name, row);
    return row;
  }

  private buildHistogram(name: string, lo: number, hi: number): SVGSVGElement {
    const svg = document.createElementNS(SVG_NS, "svg");
    svg.classList.add("constraint-hist");
    svg.setAttribute("viewBox", `0 0 ${HIST_W} ${HIST_H}`);
    svg.setAttribute("width", String(HIST_W));
    svg.setAttribute("height", String(HIST_H));
    const values = this.values.get(name) ?? [];
    const counts = binCounts(values, lo, hi, BINS);
    const peak = Math.max(1, ...counts);
    counts.forEach((count, b) => {
      const bar = document.createElementNS(SVG_NS, "rect");
      bar.classList.add("hist-bar");
      const h = (count / peak) * (HIST_H - 4);
      bar.setAttribute("x", String((b * HIST_W) / BINS));
      bar.setAttribute("y", String(HIST_H - h));
      bar.setAttribute("width", String(HIST_W / BINS - 1));
      bar.setAttribute("height", String(h));
      svg.append(bar);
    });
    this.installBrush(svg, name, lo, hi);
    return svg;
  }

  /** Horizontal brush over the histogram enters a bounded interval. */
  private installBrush(svg: SVGSVGElement, name: string, lo: number, hi: number): void {
    let startPx: number | null = null;
    let rect: SVGRectElement | null = null;
    const toValue = (px: number) => lo + (px / HIST_W) * (hi - lo);
    svg.addEventListener("pointerdown", (ev) => {
      startPx = ev.offsetX;
      rect = document.createElementNS(SVG_NS, "rect");
      rect.classList.add("hist-brush");
      rect.setAttribute("y", "0");
      rect.setAttribute("height", String(HIST_H));
      svg.append(rect);
    });
    svg.addEventListener("pointermove", (ev) => {
      if (startPx === null || !rect) return;
      rect.setAttribute("x", String(Math.min(startPx, ev.offsetX)));
      rect.setAttribute("width", String(Math.abs(ev.offsetX - startPx)));
    });
    svg.addEventListener("pointerup", (ev) => {
      if (startPx === null) return;
      const a = toValue(Math.min(startPx, ev.offsetX));
      const b = toValue(Math.max(startPx, ev.offsetX));
      if (Math.abs(ev.offsetX - startPx) >= 2) {
        this.setInterval(name, a, b);
      }
      startPx = null;
      rect?.remove();
      rect = null;
    });
  }

  private paintRow(name: string, row?: HTMLElement): void {
    const el =
      row ??
      this.root.querySelector<HTMLElement>(`.constraint-row[data-feature="${name}"]`);
    if (!el) return;
    const entry = this.get(name);
    el.classList.toggle("fixed", entry.fixed);
    const readout = el.querySelector<HTMLElement>(".interval-readout");
    if (readout) {
      readout.textContent = entry.fixed
        ? "fixed"
        : describeInterval(entry.lb, entry.ub);
    }
  }
}

export function describeInterval(lb: number | null, ub: number | null): string {
  if (lb === null && ub === null) return "unconstrained";
  if (lb !== null && ub !== null) return `[${lb.toPrecision(4)}, ${ub.toPrecision(4)}]`;
  if (lb !== null) return `>= ${lb.toPrecision(4)}`;
  return `<= ${ub!.toPrecision(4)}`;
}

export function binCounts(
  values: number[],
  lo: number,
  hi: number,
  bins: number,
): number[] {
  const counts = new Array<number>(bins).fill(0);
  if (!(hi > lo)) return counts;
  for (const v of values) {
    if (v < lo || v > hi) continue;
    const b = Math.min(bins - 1, Math.floor(((v - lo) / (hi - lo)) * bins));
    counts[b] += 1;
  }
  return counts;
}
