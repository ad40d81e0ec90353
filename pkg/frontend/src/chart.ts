/** SVG line charts for plottable tables.
 *
 * One panel per table: shared x axis, one polyline per numeric y column.
 * Dragging across the plot zooms to that x range; double click resets.
 * The data itself is drawn exactly as the service sent it.
 */

import { el, svgEl } from "./dom";
import type { SeriesSet } from "./model";

const WIDTH = 560;
const HEIGHT = 260;
const MARGIN = { left: 56, right: 14, top: 12, bottom: 30 };
const PALETTE = ["#2563eb", "#dc2626", "#059669", "#9333ea", "#ea580c", "#0891b2"];

type Span = [number, number];

function extent(values: number[]): Span {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo === Infinity) return [0, 1];
  return [lo, hi];
}

function padded([lo, hi]: Span): Span {
  if (lo === hi) return [lo - 0.5, hi + 0.5];
  const pad = (hi - lo) * 0.04;
  return [lo - pad, hi + pad];
}

function ticks([lo, hi]: Span, count = 5): number[] {
  const span = hi - lo;
  if (span <= 0) return [lo];
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= count) ?? 10 * step;
  const out: number[] = [];
  for (let v = Math.ceil(lo / chosen) * chosen; v <= hi + chosen * 1e-9; v += chosen) {
    out.push(Math.abs(v) < chosen * 1e-9 ? 0 : v);
  }
  return out;
}

function fmt(value: number): string {
  const s = value.toPrecision(6);
  return s.includes(".") ? s.replace(/\.?0+$/, "").replace(/\.?0+e/, "e") : s;
}

export class LineChart {
  readonly el: HTMLElement;
  /** current zoom window on x; null means the full data extent */
  xWindow: Span | null = null;
  private plot: SVGSVGElement;

  constructor(readonly set: SeriesSet) {
    this.el = el("figure", { class: "chart-panel", "data-name": set.name });
    const head = el("figcaption", {});
    head.appendChild(el("strong", {}, set.name));
    head.appendChild(el("span", { class: "chart-path" }, set.path.join(" / ")));
    this.el.appendChild(head);
    this.plot = svgEl("svg", {
      class: "chart-svg",
      width: String(WIDTH),
      height: String(HEIGHT),
      viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    });
    this.el.appendChild(this.plot);
    this.el.appendChild(this.legend());
    this.attachZoom();
    this.render();
  }

  fullXDomain(): Span {
    return extent(this.set.x);
  }

  /** Data extent of all y series restricted to the current x window. */
  yDomain(): Span {
    const [x0, x1] = this.xWindow ?? this.fullXDomain();
    const visible: number[] = [];
    for (const series of this.set.series) {
      for (let i = 0; i < this.set.x.length; i += 1) {
        const x = this.set.x[i]!;
        if (x >= x0 && x <= x1) visible.push(series.values[i]!);
      }
    }
    return extent(visible);
  }

  zoomTo(x0: number, x1: number): void {
    if (x0 === x1) return;
    this.xWindow = x0 < x1 ? [x0, x1] : [x1, x0];
    this.render();
  }

  resetZoom(): void {
    this.xWindow = null;
    this.render();
  }

  render(): void {
    while (this.plot.firstChild) this.plot.removeChild(this.plot.firstChild);
    const xDom = padded(this.xWindow ?? this.fullXDomain());
    const yDom = padded(this.yDomain());
    const plotW = WIDTH - MARGIN.left - MARGIN.right;
    const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
    const sx = (v: number) => MARGIN.left + ((v - xDom[0]) / (xDom[1] - xDom[0])) * plotW;
    const sy = (v: number) => MARGIN.top + plotH - ((v - yDom[0]) / (yDom[1] - yDom[0])) * plotH;

    const axes = svgEl("g", { class: "chart-axes" });
    for (const t of ticks(xDom)) {
      const x = sx(t);
      const line = svgEl("line", {
        x1: String(x),
        x2: String(x),
        y1: String(MARGIN.top),
        y2: String(MARGIN.top + plotH),
        class: "chart-grid",
      });
      axes.appendChild(line);
      const label = svgEl("text", {
        x: String(x),
        y: String(HEIGHT - 10),
        class: "chart-tick",
        "text-anchor": "middle",
      });
      label.textContent = fmt(t);
      axes.appendChild(label);
    }
    for (const t of ticks(yDom)) {
      const y = sy(t);
      axes.appendChild(
        svgEl("line", {
          x1: String(MARGIN.left),
          x2: String(MARGIN.left + plotW),
          y1: String(y),
          y2: String(y),
          class: "chart-grid",
        }),
      );
      const label = svgEl("text", {
        x: String(MARGIN.left - 6),
        y: String(y + 3),
        class: "chart-tick",
        "text-anchor": "end",
      });
      label.textContent = fmt(t);
      axes.appendChild(label);
    }
    this.plot.appendChild(axes);

    const frame = svgEl("rect", {
      x: String(MARGIN.left),
      y: String(MARGIN.top),
      width: String(plotW),
      height: String(plotH),
      class: "chart-frame",
      fill: "none",
    });
    this.plot.appendChild(frame);

    this.set.series.forEach((series, idx) => {
      const points: string[] = [];
      for (let i = 0; i < this.set.x.length; i += 1) {
        const x = this.set.x[i]!;
        if (x < xDom[0] || x > xDom[1]) continue;
        points.push(`${sx(x)},${sy(series.values[i]!)}`);
      }
      const line = svgEl("polyline", {
        points: points.join(" "),
        fill: "none",
        stroke: PALETTE[idx % PALETTE.length]!,
        "stroke-width": "1.5",
        class: "chart-line",
        "data-series": series.name,
      });
      this.plot.appendChild(line);
    });

    const xLabel = svgEl("text", {
      x: String(MARGIN.left + plotW / 2),
      y: String(HEIGHT - 0.5),
      class: "chart-axis-name",
      "text-anchor": "middle",
    });
    xLabel.textContent = this.set.xName;
    this.plot.appendChild(xLabel);
  }

  private legend(): HTMLElement {
    const box = el("div", { class: "chart-legend" });
    this.set.series.forEach((series, idx) => {
      const item = el("span", { class: "legend-item" });
      const swatch = el("span", { class: "legend-swatch" });
      swatch.style.background = PALETTE[idx % PALETTE.length]!;
      item.appendChild(swatch);
      item.appendChild(document.createTextNode(series.name));
      box.appendChild(item);
    });
    return box;
  }

  private attachZoom(): void {
    let dragStart: number | null = null;
    let band: SVGRectElement | null = null;

    const pxToData = (px: number): number => {
      const dom = padded(this.xWindow ?? this.fullXDomain());
      const plotW = WIDTH - MARGIN.left - MARGIN.right;
      return dom[0] + ((px - MARGIN.left) / plotW) * (dom[1] - dom[0]);
    };
    const localX = (event: MouseEvent): number =>
      event.clientX - this.plot.getBoundingClientRect().left;

    this.plot.addEventListener("mousedown", (event) => {
      dragStart = localX(event as MouseEvent);
      band = svgEl("rect", {
        y: String(MARGIN.top),
        height: String(HEIGHT - MARGIN.top - MARGIN.bottom),
        class: "chart-band",
      });
      this.plot.appendChild(band);
    });
    this.plot.addEventListener("mousemove", (event) => {
      if (dragStart === null || !band) return;
      const now = localX(event as MouseEvent);
      band.setAttribute("x", String(Math.min(dragStart, now)));
      band.setAttribute("width", String(Math.abs(now - dragStart)));
    });
    const finish = (event: MouseEvent) => {
      if (dragStart === null) return;
      const end = localX(event);
      const from = dragStart;
      dragStart = null;
      if (band) {
        band.remove();
        band = null;
      }
      // tiny drags are clicks, not zoom requests
      if (Math.abs(end - from) > 5) this.zoomTo(pxToData(from), pxToData(end));
    };
    this.plot.addEventListener("mouseup", (event) => finish(event as MouseEvent));
    this.plot.addEventListener("dblclick", () => this.resetZoom());
  }
}

export function renderChart(set: SeriesSet): LineChart {
  return new LineChart(set);
}
