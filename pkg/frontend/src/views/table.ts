import { ApiError } from "../api.js";
import type { BackendApi } from "../api.js";
import { SessionStore } from "../state.js";
import { clusterColor } from "../colors.js";
import type { TablePageJson } from "../types.js";

const PAGE_SIZE = 25;

/**
 * Paged, sortable table listing with the filter-expression input, keyword
 * search, and CSV export. Parser errors surface in place: the offending
 * offset is underlined below the input.
 */
export class TableView {
  readonly root: HTMLElement;
  private page: TablePageJson | null = null;
  private offset = 0;
  private sortBy: string | null = null;
  private sortDir: "asc" | "desc" = "asc";

  private filterInput!: HTMLInputElement;
  private searchInput!: HTMLInputElement;
  private errorBox!: HTMLElement;
  private matchCount!: HTMLElement;
  private body!: HTMLElement;

  constructor(
    private readonly api: BackendApi,
    private readonly store: SessionStore,
  ) {
    this.root = document.createElement("section");
    this.root.className = "table-view";
    this.buildChrome();
    store.on("table-dirty", () => void this.refresh());
    store.on("clustering", () => void this.refresh());
    store.on("selection", () => this.paintSelection());
  }

  private buildChrome(): void {
    const bar = document.createElement("div");
    bar.className = "table-toolbar";

    this.filterInput = document.createElement("input");
    this.filterInput.className = "filter-input";
    this.filterInput.placeholder = 'filter, e.g. age > 40 & weight<180';
    this.filterInput.addEventListener("keydown", (ev) => {
      if ((ev as KeyboardEvent).key === "Enter") void this.applyFilter();
    });

    this.searchInput = document.createElement("input");
    this.searchInput.className = "search-input";
    this.searchInput.placeholder = "keyword search";
    this.searchInput.addEventListener("keydown", (ev) => {
      if ((ev as KeyboardEvent).key === "Enter") void this.applyFilter();
    });

    const exportLink = document.createElement("a");
    exportLink.className = "export-link";
    exportLink.textContent = "export CSV";
    exportLink.addEventListener("click", () => {
      exportLink.setAttribute("href", this.api.exportUrl(this.store.sessionId));
    });

    this.matchCount = document.createElement("span");
    this.matchCount.className = "match-count";

    this.errorBox = document.createElement("div");
    this.errorBox.className = "filter-error";
    this.errorBox.hidden = true;

    bar.append(this.filterInput, this.searchInput, exportLink, this.matchCount);
    this.body = document.createElement("div");
    this.body.className = "table-body";
    this.root.append(bar, this.errorBox, this.body);
  }

  async applyFilter(): Promise<void> {
    const expr = this.filterInput.value.trim();
    const keyword = this.searchInput.value.trim();
    try {
      const result = await this.api.setFilter(this.store.sessionId, {
        expr: expr || undefined,
        keyword: keyword || undefined,
      });
      this.errorBox.hidden = true;
      this.errorBox.textContent = "";
      this.matchCount.textContent = `${result.match_count} rows match`;
      this.offset = 0;
      this.store.bumpRevision(result.revision);
    } catch (err) {
      if (err instanceof ApiError && typeof err.payload.offset === "number") {
        this.showParseError(expr, err.payload.offset, String(err.payload.message ?? ""));
      } else {
        throw err;
      }
    }
  }

  /** Underline the failure offset beneath the expression. */
  private showParseError(expr: string, offset: number, message: string): void {
    this.errorBox.hidden = false;
    this.errorBox.replaceChildren();
    const line = document.createElement("code");
    line.textContent = expr;
    const caret = document.createElement("code");
    caret.className = "error-caret";
    caret.dataset.offset = String(offset);
    caret.textContent = " ".repeat(offset) + "^";
    const note = document.createElement("span");
    note.textContent = message;
    this.errorBox.append(line, document.createElement("br"), caret, note);
  }

  async refresh(): Promise<void> {
    const page = await this.api.tablePage(this.store.sessionId, {
      offset: this.offset,
      limit: PAGE_SIZE,
      sort_by: this.sortBy ?? undefined,
      dir: this.sortDir,
    });
    if (page.revision !== this.store.revision) return; // stale response
    this.page = page;
    this.render();
  }

  private toggleSort(name: string): void {
    if (this.sortBy === name) {
      this.sortDir = this.sortDir === "asc" ? "desc" : "asc";
    } else {
      this.sortBy = name;
      this.sortDir = "asc";
    }
    void this.refresh();
  }

  private render(): void {
    if (!this.page || !this.store.metadata) return;
    const table = document.createElement("table");
    const head = document.createElement("tr");

    const idCell = document.createElement("th");
    idCell.textContent = this.store.metadata.id_name ?? "#";
    head.append(idCell);
    for (const feature of this.store.metadata.features) {
      const th = document.createElement("th");
      th.textContent = feature.name;
      th.dataset.feature = feature.name;
      th.addEventListener("click", () => this.toggleSort(feature.name));
      if (this.sortBy === feature.name) {
        th.textContent += this.sortDir === "asc" ? " ▲" : " ▼";
      }
      head.append(th);
    }
    const labelTh = document.createElement("th");
    labelTh.textContent = "cluster";
    head.append(labelTh);
    table.append(head);

    for (const row of this.page.rows) {
      const tr = document.createElement("tr");
      tr.dataset.rowId = row.id;
      tr.addEventListener("click", () => this.store.setSelection([row.id]));
      const id = document.createElement("td");
      id.textContent = row.id;
      tr.append(id);
      for (const feature of this.store.metadata.features) {
        const td = document.createElement("td");
        const value = row.features[feature.name];
        td.textContent =
          typeof value === "number" ? formatNumber(value) : String(value ?? "");
        tr.append(td);
      }
      const label = document.createElement("td");
      if (row.label !== null) {
        label.textContent = String(row.label);
        label.style.color = clusterColor(row.label);
      }
      tr.append(label);
      table.append(tr);
    }

    const pager = document.createElement("div");
    pager.className = "pager";
    const prev = document.createElement("button");
    prev.textContent = "prev";
    prev.disabled = this.offset === 0;
    prev.addEventListener("click", () => {
      this.offset = Math.max(0, this.offset - PAGE_SIZE);
      void this.refresh();
    });
    const next = document.createElement("button");
    next.textContent = "next";
    next.disabled = this.offset + PAGE_SIZE >= this.page.total;
    next.addEventListener("click", () => {
      this.offset += PAGE_SIZE;
      void this.refresh();
    });
    const status = document.createElement("span");
    status.textContent = `${this.offset + 1}-${Math.min(
      this.offset + PAGE_SIZE,
      this.page.total,
    )} of ${this.page.total}`;
    pager.append(prev, status, next);

    this.body.replaceChildren(table, pager);
    this.paintSelection();
  }

  private paintSelection(): void {
    for (const tr of this.body.querySelectorAll<HTMLElement>("tr[data-row-id]")) {
      tr.classList.toggle("selected", this.store.selection.has(tr.dataset.rowId!));
    }
  }
}

export function formatNumber(value: number): string {
  if (Number.isInteger(value)) return String(value);
  return value.toPrecision(6).replace(/\.?0+$/, "");
}
