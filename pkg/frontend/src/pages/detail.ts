/** Contribution detail page: header, review buttons, metadata tree, charts,
 * tables, and the verbatim serialized form.
 *
 * The whole page is a rendering of one GET response.  Review clicks PATCH
 * the state and re-render from the response; a 409 or 403 rolls the badge
 * back and reports inline without losing the page.
 */

import { ApiError, getContribution, patchState } from "../api";
import type { State } from "../api";
import { renderChart } from "../chart";
import { append, clear, el, formatStamp } from "../dom";
import { reviewButtons } from "../machine";
import { buildViewModel } from "../model";
import type { ContributionViewModel } from "../model";
import { renderTree } from "../tree";

// One transition at a time per contribution, page-wide.  A second click
// queues behind the first instead of racing it.
const transitionQueues = new Map<string, Promise<void>>();

function serialized(cid: string, task: () => Promise<void>): Promise<void> {
  const tail = transitionQueues.get(cid) ?? Promise.resolve();
  const next = tail.then(task, task);
  transitionQueues.set(cid, next);
  return next;
}

export class DetailPage {
  vm: ContributionViewModel | null = null;
  error: string | null = null;
  private rawVisible = false;

  constructor(
    readonly root: HTMLElement,
    readonly cid: string,
  ) {}

  async load(): Promise<void> {
    try {
      const record = await getContribution(this.cid);
      this.vm = buildViewModel(record);
      this.error = null;
    } catch (err) {
      this.vm = null;
      if (err instanceof ApiError && err.status === 404) {
        this.error = "Contribution not found or not permitted.";
      } else {
        this.error = err instanceof Error ? err.message : String(err);
      }
    }
    this.render();
  }

  render(): void {
    clear(this.root);
    if (!this.vm) {
      this.root.appendChild(
        el("p", { class: "friendly-error" }, this.error ?? "Nothing to show."),
      );
      return;
    }
    const vm = this.vm;

    const header = el("header", { class: "detail-header" });
    const title = el("h2", {}, vm.name);
    title.appendChild(el("span", { class: `state-badge state-${vm.state}` }, vm.state));
    header.appendChild(title);
    const meta = el("dl", { class: "detail-meta" });
    const pairs: [string, string][] = [
      ["identifier", vm.identifier],
      ["project", vm.project ?? "(none)"],
      ["contributor", vm.contributor],
      ["revision", String(vm.revision)],
      ["updated", formatStamp(vm.updated)],
    ];
    for (const [key, value] of pairs) {
      meta.appendChild(el("dt", {}, key));
      meta.appendChild(el("dd", {}, value));
    }
    header.appendChild(meta);
    header.appendChild(this.reviewBar());
    this.root.appendChild(header);

    const body = el("div", { class: "detail-body" });

    const treeBox = el("section", { class: "detail-tree" });
    treeBox.appendChild(el("h3", {}, "Metadata"));
    treeBox.appendChild(renderTree(vm.tree));
    body.appendChild(treeBox);

    if (vm.charts.length > 0) {
      const charts = el("section", { class: "detail-charts" });
      charts.appendChild(el("h3", {}, "Charts"));
      for (const set of vm.charts) {
        charts.appendChild(renderChart(set).el);
      }
      body.appendChild(charts);
    }

    if (vm.tables.length > 0) {
      const tables = el("section", { class: "detail-tables" });
      tables.appendChild(el("h3", {}, "Tables"));
      for (const table of vm.tables) {
        const wrap = el("div", { class: "table-wrap", "data-name": table.name });
        wrap.appendChild(el("h4", {}, table.path.join(" / ")));
        const grid = el("table", { class: "data-table" });
        const head = el("tr", {});
        for (const column of table.columns) head.appendChild(el("th", {}, column));
        grid.appendChild(head);
        for (const row of table.rows) {
          const tr = el("tr", {});
          for (const cell of row) {
            tr.appendChild(el("td", {}, typeof cell === "number" ? String(cell) : cell));
          }
          grid.appendChild(tr);
        }
        wrap.appendChild(grid);
        tables.appendChild(wrap);
      }
      body.appendChild(tables);
    }

    const rawBox = el("section", { class: "detail-raw" });
    const toggle = el(
      "button",
      { class: "raw-toggle", type: "button" },
      this.rawVisible ? "Hide serialized form" : "Show serialized form",
    );
    const pre = el("pre", { class: "raw-text" }, vm.mpfile);
    pre.style.display = this.rawVisible ? "" : "none";
    toggle.addEventListener("click", () => {
      this.rawVisible = !this.rawVisible;
      pre.style.display = this.rawVisible ? "" : "none";
      toggle.textContent = this.rawVisible ? "Hide serialized form" : "Show serialized form";
    });
    append(rawBox, toggle, pre);
    body.appendChild(rawBox);

    this.root.appendChild(body);
  }

  private reviewBar(): HTMLElement {
    const bar = el("div", { class: "review-bar" });
    if (!this.vm) return bar;
    for (const action of reviewButtons(this.vm.state)) {
      const button = el(
        "button",
        { class: "review-button", type: "button", "data-target": action.target },
        action.label,
      );
      button.disabled = !action.enabled;
      if (action.enabled) {
        button.addEventListener("click", () => {
          void this.review(action.target);
        });
      }
      bar.appendChild(button);
    }
    const slot = el("span", { class: "review-error", role: "alert" });
    bar.appendChild(slot);
    return bar;
  }

  /** Fire one transition, optimistically showing the target state. */
  review(target: State): Promise<void> {
    return serialized(this.cid, async () => {
      if (!this.vm) return;
      const previous = this.vm.state;
      this.vm.state = target;
      this.render();
      try {
        const resp = await patchState(this.cid, target);
        this.vm.state = resp.state;
        this.vm.revision = resp.revision;
        this.render();
      } catch (err) {
        // roll the badge back, keep the page, report inline
        this.vm.state = previous;
        this.render();
        const slot = this.root.querySelector(".review-error");
        if (slot) {
          slot.textContent =
            err instanceof ApiError
              ? `state change failed (${err.status}): ${err.message}`
              : `state change failed: ${err instanceof Error ? err.message : String(err)}`;
        }
      }
    });
  }
}
