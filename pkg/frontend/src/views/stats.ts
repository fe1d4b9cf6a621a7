import { ApiError } from "../api.js";
import type { BackendApi } from "../api.js";
import { SessionStore } from "../state.js";
import { CORR_NEGATIVE, CORR_POSITIVE, CORR_UNDEFINED } from "../colors.js";
import type { CorrelationEntryJson } from "../types.js";

const BAR_W = 220;

/**
 * Statistics view: one-way ANOVA between selected clusters on a chosen
 * feature, and the all-pairs correlation list as |r|-sorted sign-colored
 * bars (the server pre-sorts; the view renders in response order).
 */
export class StatsView {
  readonly root: HTMLElement;
  private featureSelect!: HTMLSelectElement;
  private clustersInput!: HTMLInputElement;
  private anovaBox!: HTMLElement;
  private corrBox!: HTMLElement;

  constructor(
    private readonly api: BackendApi,
    private readonly store: SessionStore,
  ) {
    this.root = document.createElement("section");
    this.root.className = "stats-view";
    this.buildChrome();
    store.on("revision", () => {
      this.anovaBox.replaceChildren();
      this.corrBox.replaceChildren();
    });
  }

  private buildChrome(): void {
    const anovaBar = document.createElement("div");
    anovaBar.className = "anova-bar";
    this.featureSelect = document.createElement("select");
    this.clustersInput = document.createElement("input");
    this.clustersInput.placeholder = "cluster ids, e.g. 0,1";
    const run = document.createElement("button");
    run.textContent = "run ANOVA";
    run.addEventListener("click", () => void this.runAnova());
    anovaBar.append(this.featureSelect, this.clustersInput, run);

    this.anovaBox = document.createElement("div");
    this.anovaBox.className = "anova-result";

    const corrBtn = document.createElement("button");
    corrBtn.textContent = "correlations";
    corrBtn.addEventListener("click", () => void this.loadCorrelations());
    this.corrBox = document.createElement("div");
    this.corrBox.className = "correlation-bars";

    this.root.append(anovaBar, this.anovaBox, corrBtn, this.corrBox);
  }

  populateFeatures(): void {
    this.featureSelect.replaceChildren();
    for (const name of this.store.numericFeatureNames()) {
      const option = document.createElement("option");
      option.value = name;
      option.textContent = name;
      this.featureSelect.append(option);
    }
  }

  /** Cluster ids come either from the input box or the brushed selection. */
  async runAnova(): Promise<void> {
    const ids = this.clustersInput.value
      .split(",")
      .map((s) => s.trim())
      .filter((s) => s.length > 0)
      .map(Number);
    if (ids.length < 2) {
      this.anovaBox.textContent = "pick at least two cluster ids";
      return;
    }
    try {
      const res = await this.api.anova(this.store.sessionId, this.featureSelect.value, ids);
      if (res.revision !== this.store.revision) return;
      this.anovaBox.replaceChildren();
      const headline = document.createElement("div");
      headline.className = "anova-headline";
      const f = res.F === null ? "inf" : res.F.toPrecision(6);
      headline.textContent = `F(${res.df1}, ${res.df2}) = ${f}, p = ${res.p.toPrecision(4)}`;
      const means = document.createElement("div");
      means.textContent = `group means: ${res.groups
        .map((m) => m.toPrecision(4))
        .join(", ")} (grand ${res.grand_mean.toPrecision(4)})`;
      this.anovaBox.append(headline, means);
    } catch (err) {
      if (err instanceof ApiError && err.isConflict) {
        this.anovaBox.textContent = `needs a fresh clustering (${err.payload.reason})`;
      } else {
        throw err;
      }
    }
  }

  async loadCorrelations(): Promise<void> {
    const res = await this.api.correlations(this.store.sessionId);
    if (res.revision !== this.store.revision) return;
    this.renderCorrelations(res.correlations);
  }

  renderCorrelations(entries: CorrelationEntryJson[]): void {
    this.corrBox.replaceChildren();
    for (const entry of entries) {
      const row = document.createElement("div");
      row.className = "corr-row";
      row.dataset.pair = `${entry.a}|${entry.b}`;
      const label = document.createElement("span");
      label.className = "corr-label";
      label.textContent = `${entry.a} - ${entry.b}`;
      const bar = document.createElement("span");
      bar.className = "corr-bar";
      if (!entry.defined || entry.r === null) {
        bar.style.background = CORR_UNDEFINED;
        bar.style.width = "2px";
        row.dataset.r = "undefined";
      } else {
        bar.style.background = entry.r >= 0 ? CORR_POSITIVE : CORR_NEGATIVE;
        bar.style.width = `${Math.abs(entry.r) * BAR_W}px`;
        row.dataset.r = String(entry.r);
      }
      const value = document.createElement("span");
      value.textContent = entry.defined && entry.r !== null ? entry.r.toFixed(3) : "n/a";
      row.append(label, bar, value);
      this.corrBox.append(row);
    }
  }
}
