/** Occupancy heat view of a property grid.
 *
 * Cells come straight from the grid endpoint's edges and counts; this view
 * never re-bins anything.  When a zoom window is set, only the cells that
 * intersect it are drawn and the axes rescale to the window.  Drags are
 * reported to the page in data coordinates; the page decides whether the
 * rectangle means "select a region" or "zoom in".
 */

import { el, svgEl } from "./dom";
import type { GridPayload } from "./api";

export interface Rect {
  x0: number;
  x1: number;
  y0: number;
  y1: number;
}

const WIDTH = 480;
const HEIGHT = 360;
const MARGIN = { left: 60, right: 12, top: 12, bottom: 34 };
const PLOT_W = WIDTH - MARGIN.left - MARGIN.right;
const PLOT_H = HEIGHT - MARGIN.top - MARGIN.bottom;

function fmt(value: number): string {
  const s = value.toPrecision(5);
  return s.includes(".") ? s.replace(/\.?0+$/, "").replace(/\.?0+e/, "e") : s;
}

export class Heatmap {
  readonly el: HTMLElement;
  onRect: ((rect: Rect) => void) | null = null;
  private svg: SVGSVGElement;
  private view: Rect;

  constructor(
    readonly grid: GridPayload,
    window_: Rect | null = null,
  ) {
    const xe = grid.x_edges;
    const ye = grid.y_edges;
    this.view = window_ ?? {
      x0: xe[0] ?? 0,
      x1: xe[xe.length - 1] ?? 1,
      y0: ye[0] ?? 0,
      y1: ye[ye.length - 1] ?? 1,
    };
    this.el = el("figure", { class: "heatmap" });
    this.svg = svgEl("svg", {
      class: "heatmap-svg",
      width: String(WIDTH),
      height: String(HEIGHT),
      viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    });
    this.el.appendChild(this.svg);
    this.render();
    this.attachDrag();
  }

  private sx(v: number): number {
    return MARGIN.left + ((v - this.view.x0) / (this.view.x1 - this.view.x0)) * PLOT_W;
  }

  private sy(v: number): number {
    return MARGIN.top + PLOT_H - ((v - this.view.y0) / (this.view.y1 - this.view.y0)) * PLOT_H;
  }

  /** Inverse of the plot mapping, used to turn drag pixels into data. */
  dataPoint(px: number, py: number): [number, number] {
    const x = this.view.x0 + ((px - MARGIN.left) / PLOT_W) * (this.view.x1 - this.view.x0);
    const y = this.view.y0 + ((MARGIN.top + PLOT_H - py) / PLOT_H) * (this.view.y1 - this.view.y0);
    return [x, y];
  }

  private render(): void {
    const { grid } = this;
    let max = 0;
    for (const column of grid.counts) {
      for (const count of column) if (count > max) max = count;
    }

    const cells = svgEl("g", { class: "heat-cells" });
    for (let ix = 0; ix < grid.counts.length; ix += 1) {
      const column = grid.counts[ix]!;
      for (let iy = 0; iy < column.length; iy += 1) {
        const cx0 = grid.x_edges[ix]!;
        const cx1 = grid.x_edges[ix + 1]!;
        const cy0 = grid.y_edges[iy]!;
        const cy1 = grid.y_edges[iy + 1]!;
        // skip cells with no overlap with the zoom window
        if (cx1 <= this.view.x0 || cx0 >= this.view.x1) continue;
        if (cy1 <= this.view.y0 || cy0 >= this.view.y1) continue;
        const x0 = Math.max(cx0, this.view.x0);
        const x1 = Math.min(cx1, this.view.x1);
        const y0 = Math.max(cy0, this.view.y0);
        const y1 = Math.min(cy1, this.view.y1);
        const count = column[iy]!;
        const cell = svgEl("rect", {
          x: String(this.sx(x0)),
          y: String(this.sy(y1)),
          width: String(this.sx(x1) - this.sx(x0)),
          height: String(this.sy(y0) - this.sy(y1)),
          class: count > 0 ? "heat-cell occupied" : "heat-cell",
          "data-ix": String(ix),
          "data-iy": String(iy),
          "data-count": String(count),
          "fill-opacity": count > 0 && max > 0 ? String(0.15 + 0.85 * (count / max)) : "1",
        });
        const tip = svgEl("title", {});
        tip.textContent = `${count} in [${fmt(cx0)}, ${fmt(cx1)}] x [${fmt(cy0)}, ${fmt(cy1)}]`;
        cell.appendChild(tip);
        cells.appendChild(cell);
      }
    }
    this.svg.appendChild(cells);

    const frame = svgEl("rect", {
      x: String(MARGIN.left),
      y: String(MARGIN.top),
      width: String(PLOT_W),
      height: String(PLOT_H),
      class: "heat-frame",
      fill: "none",
    });
    this.svg.appendChild(frame);

    const labels: [string, string, string, string][] = [
      [fmt(this.view.x0), String(MARGIN.left), String(HEIGHT - 14), "middle"],
      [fmt(this.view.x1), String(MARGIN.left + PLOT_W), String(HEIGHT - 14), "middle"],
      [fmt(this.view.y0), String(MARGIN.left - 6), String(MARGIN.top + PLOT_H + 3), "end"],
      [fmt(this.view.y1), String(MARGIN.left - 6), String(MARGIN.top + 3), "end"],
    ];
    for (const [text, x, y, anchor] of labels) {
      const label = svgEl("text", { x, y, class: "heat-tick", "text-anchor": anchor });
      label.textContent = text;
      this.svg.appendChild(label);
    }
    const xName = svgEl("text", {
      x: String(MARGIN.left + PLOT_W / 2),
      y: String(HEIGHT - 1),
      class: "heat-axis-name",
      "text-anchor": "middle",
    });
    xName.textContent = this.grid.x;
    this.svg.appendChild(xName);
    const yName = svgEl("text", {
      x: "12",
      y: String(MARGIN.top + PLOT_H / 2),
      class: "heat-axis-name",
      transform: `rotate(-90 12 ${MARGIN.top + PLOT_H / 2})`,
      "text-anchor": "middle",
    });
    yName.textContent = this.grid.y;
    this.svg.appendChild(yName);
  }

  private attachDrag(): void {
    let start: [number, number] | null = null;
    let band: SVGRectElement | null = null;

    const local = (event: MouseEvent): [number, number] => {
      const box = this.svg.getBoundingClientRect();
      return [event.clientX - box.left, event.clientY - box.top];
    };

    this.svg.addEventListener("mousedown", (event) => {
      start = local(event as MouseEvent);
      band = svgEl("rect", { class: "heat-band" });
      this.svg.appendChild(band);
    });
    this.svg.addEventListener("mousemove", (event) => {
      if (!start || !band) return;
      const [px, py] = local(event as MouseEvent);
      band.setAttribute("x", String(Math.min(start[0], px)));
      band.setAttribute("y", String(Math.min(start[1], py)));
      band.setAttribute("width", String(Math.abs(px - start[0])));
      band.setAttribute("height", String(Math.abs(py - start[1])));
    });
    this.svg.addEventListener("mouseup", (event) => {
      if (!start) return;
      const [px, py] = local(event as MouseEvent);
      const from = start;
      start = null;
      if (band) {
        band.remove();
        band = null;
      }
      if (Math.abs(px - from[0]) < 4 || Math.abs(py - from[1]) < 4) return;
      const [ax, ay] = this.dataPoint(from[0], from[1]);
      const [bx, by] = this.dataPoint(px, py);
      this.onRect?.({
        x0: Math.min(ax, bx),
        x1: Math.max(ax, bx),
        y0: Math.min(ay, by),
        y1: Math.max(ay, by),
      });
    });
  }
}
