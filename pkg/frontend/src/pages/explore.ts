/** Grid explorer: pick a project and two properties, see the occupancy
 * heat view, drag to select a region or zoom in, and jump to the records
 * inside the selection.
 *
 * The region list always comes from the region endpoint.  Bin counts only
 * paint cells; they are never unpacked into a result list.  Zooming asks
 * the service for a finer grid sized to the visible window.
 */

import { ApiError, getGrid, getRegion } from "../api";
import type { GridPayload } from "../api";
import { clear, el } from "../dom";
import { Heatmap } from "../heatmap";
import type { Rect } from "../heatmap";

const BASE_NX = 10;
const BASE_NY = 10;
const MAX_BINS = 200;

export interface ExplorerViewModel {
  project: string;
  x: string;
  y: string;
  grid: GridPayload | null;
  /** zoom window in data coordinates; null shows the full extent */
  window: Rect | null;
  selection: Rect | null;
  regionIds: string[] | null;
}

export interface ExplorerOptions {
  project?: string;
  x?: string;
  y?: string;
  nx?: number;
  ny?: number;
}

export class ExplorerPage {
  vm: ExplorerViewModel;
  mode: "select" | "zoom" = "select";
  error: string | null = null;
  readonly baseNx: number;
  readonly baseNy: number;

  private form!: HTMLFormElement;
  private gridBox!: HTMLElement;
  private resultsBox!: HTMLElement;

  constructor(
    readonly root: HTMLElement,
    initial: ExplorerOptions = {},
  ) {
    this.baseNx = initial.nx ?? BASE_NX;
    this.baseNy = initial.ny ?? BASE_NY;
    this.vm = {
      project: initial.project ?? "",
      x: initial.x ?? "x",
      y: initial.y ?? "y",
      grid: null,
      window: null,
      selection: null,
      regionIds: null,
    };
    this.buildShell();
  }

  /** Bin counts for the next grid request: finer when zoomed in, so the
   * visible window keeps roughly the base cell count. */
  binsForWindow(): { nx: number; ny: number } {
    const grid = this.vm.grid;
    const win = this.vm.window;
    if (!grid || !win) return { nx: this.baseNx, ny: this.baseNy };
    const xe = grid.x_edges;
    const ye = grid.y_edges;
    const fullX = (xe[xe.length - 1] ?? 1) - (xe[0] ?? 0);
    const fullY = (ye[ye.length - 1] ?? 1) - (ye[0] ?? 0);
    const nx = Math.ceil(this.baseNx * (fullX / Math.max(win.x1 - win.x0, fullX * 1e-6)));
    const ny = Math.ceil(this.baseNy * (fullY / Math.max(win.y1 - win.y0, fullY * 1e-6)));
    return {
      nx: Math.min(Math.max(nx, this.baseNx), MAX_BINS),
      ny: Math.min(Math.max(ny, this.baseNy), MAX_BINS),
    };
  }

  async loadGrid(): Promise<void> {
    const { nx, ny } = this.binsForWindow();
    try {
      this.vm.grid = await getGrid({
        x: this.vm.x,
        y: this.vm.y,
        project: this.vm.project || undefined,
        nx,
        ny,
      });
      this.error = null;
    } catch (err) {
      // keep the previous grid and the selector values; just report
      this.error = err instanceof ApiError ? err.message : String(err);
    }
    this.renderGrid();
  }

  /** Fetch the records inside `rect` from the region endpoint. */
  async selectRegion(rect: Rect): Promise<void> {
    this.vm.selection = rect;
    try {
      const resp = await getRegion({
        x: this.vm.x,
        y: this.vm.y,
        x0: rect.x0,
        x1: rect.x1,
        y0: rect.y0,
        y1: rect.y1,
        project: this.vm.project || undefined,
      });
      this.vm.regionIds = resp.ids;
      this.error = null;
    } catch (err) {
      this.vm.regionIds = null;
      this.error = err instanceof ApiError ? err.message : String(err);
    }
    this.renderGrid();
    this.renderResults();
  }

  async zoomTo(rect: Rect): Promise<void> {
    this.vm.window = rect;
    await this.loadGrid();
  }

  async resetView(): Promise<void> {
    this.vm.window = null;
    await this.loadGrid();
  }

  private buildShell(): void {
    clear(this.root);
    this.form = el("form", { class: "explorer-form" });
    const fields: [string, keyof Pick<ExplorerViewModel, "project" | "x" | "y">][] = [
      ["project", "project"],
      ["x property", "x"],
      ["y property", "y"],
    ];
    for (const [label, key] of fields) {
      const wrap = el("label", { class: "field" }, `${label} `);
      const input = el("input", { name: key, value: this.vm[key] });
      input.addEventListener("input", () => {
        this.vm[key] = input.value;
      });
      wrap.appendChild(input);
      this.form.appendChild(wrap);
    }
    const load = el("button", { type: "submit", class: "load-grid" }, "Load grid");
    this.form.appendChild(load);
    this.form.addEventListener("submit", (event) => {
      event.preventDefault();
      this.vm.window = null;
      this.vm.selection = null;
      this.vm.regionIds = null;
      void this.loadGrid().then(() => this.renderResults());
    });

    const modes = el("div", { class: "mode-row" });
    for (const mode of ["select", "zoom"] as const) {
      const label = el("label", { class: "mode-option" });
      const radio = el("input", { type: "radio", name: "drag-mode", value: mode });
      (radio as HTMLInputElement).checked = this.mode === mode;
      radio.addEventListener("change", () => {
        this.mode = mode;
      });
      label.appendChild(radio);
      label.appendChild(
        document.createTextNode(mode === "select" ? " drag selects a region" : " drag zooms in"),
      );
      modes.appendChild(label);
    }
    const reset = el("button", { type: "button", class: "reset-view" }, "Reset view");
    reset.addEventListener("click", () => {
      void this.resetView();
    });
    modes.appendChild(reset);

    this.gridBox = el("div", { class: "explorer-grid" });
    this.resultsBox = el("div", { class: "explorer-results" });
    this.root.appendChild(this.form);
    this.root.appendChild(modes);
    this.root.appendChild(this.gridBox);
    this.root.appendChild(this.resultsBox);
    this.renderGrid();
    this.renderResults();
  }

  private renderGrid(): void {
    clear(this.gridBox);
    if (this.error) {
      this.gridBox.appendChild(el("p", { class: "inline-error", role: "alert" }, this.error));
    }
    if (!this.vm.grid) {
      if (!this.error) {
        this.gridBox.appendChild(
          el("p", { class: "hint" }, "Choose a project and two numeric properties."),
        );
      }
      return;
    }
    const heat = new Heatmap(this.vm.grid, this.vm.window);
    heat.onRect = (rect) => {
      if (this.mode === "zoom") void this.zoomTo(rect);
      else void this.selectRegion(rect);
    };
    this.gridBox.appendChild(heat.el);
    this.gridBox.appendChild(
      el(
        "p",
        { class: "grid-summary" },
        `${this.vm.grid.total} records on ${this.vm.grid.x} vs ${this.vm.grid.y}`,
      ),
    );
  }

  private renderResults(): void {
    clear(this.resultsBox);
    if (this.vm.regionIds === null) {
      this.resultsBox.appendChild(
        el("p", { class: "hint" }, "Drag a rectangle on the grid to list the records inside."),
      );
      return;
    }
    this.resultsBox.appendChild(el("h3", {}, `Region results (${this.vm.regionIds.length})`));
    const list = el("ol", { class: "region-results" });
    for (const cid of this.vm.regionIds) {
      const item = el("li", {});
      item.appendChild(el("a", { href: `#/c/${encodeURIComponent(cid)}` }, cid));
      list.appendChild(item);
    }
    this.resultsBox.appendChild(list);
  }
}
