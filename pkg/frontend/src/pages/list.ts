/** Contribution index: filterable listing with links into detail pages. */

import { ApiError, listContributions } from "../api";
import type { ListPayload } from "../api";
import { clear, el, formatStamp } from "../dom";

const PAGE_SIZE = 25;

export class ListPage {
  page: ListPayload | null = null;
  error: string | null = null;
  project = "";
  state = "";
  offset = 0;

  private form!: HTMLFormElement;
  private body!: HTMLElement;

  constructor(readonly root: HTMLElement) {
    this.buildShell();
  }

  async load(): Promise<void> {
    try {
      this.page = await listContributions({
        project: this.project || undefined,
        state: this.state || undefined,
        limit: PAGE_SIZE,
        offset: this.offset,
      });
      this.error = null;
    } catch (err) {
      this.page = null;
      this.error = err instanceof ApiError ? err.message : String(err);
    }
    this.render();
  }

  private buildShell(): void {
    clear(this.root);
    this.form = el("form", { class: "list-form" });
    const projectLabel = el("label", { class: "field" }, "project ");
    const projectInput = el("input", { name: "project", value: this.project });
    projectInput.addEventListener("input", () => {
      this.project = projectInput.value;
    });
    projectLabel.appendChild(projectInput);
    this.form.appendChild(projectLabel);

    const stateLabel = el("label", { class: "field" }, "state ");
    const stateSelect = el("select", { name: "state" });
    for (const option of ["", "staged", "approved", "released", "rejected"]) {
      const opt = el("option", { value: option }, option || "(any)");
      stateSelect.appendChild(opt);
    }
    stateSelect.addEventListener("change", () => {
      this.state = (stateSelect as HTMLSelectElement).value;
    });
    stateLabel.appendChild(stateSelect);
    this.form.appendChild(stateLabel);

    this.form.appendChild(el("button", { type: "submit" }, "Filter"));
    this.form.addEventListener("submit", (event) => {
      event.preventDefault();
      this.offset = 0;
      void this.load();
    });

    this.body = el("div", { class: "list-body" });
    this.root.appendChild(this.form);
    this.root.appendChild(this.body);
  }

  private render(): void {
    clear(this.body);
    if (this.error) {
      this.body.appendChild(el("p", { class: "inline-error", role: "alert" }, this.error));
      return;
    }
    if (!this.page) return;
    const { total, results } = this.page;
    this.body.appendChild(
      el("p", { class: "list-summary" }, `${total} visible contribution${total === 1 ? "" : "s"}`),
    );
    const table = el("table", { class: "data-table list-table" });
    const head = el("tr", {});
    for (const column of ["name", "project", "state", "revision", "updated", ""]) {
      head.appendChild(el("th", {}, column));
    }
    table.appendChild(head);
    for (const record of results) {
      const row = el("tr", {});
      const nameCell = el("td", {});
      nameCell.appendChild(el("a", { href: `#/c/${encodeURIComponent(record.cid)}` }, record.name));
      row.appendChild(nameCell);
      row.appendChild(el("td", {}, record.project ?? ""));
      const stateCell = el("td", {});
      stateCell.appendChild(el("span", { class: `state-badge state-${record.state}` }, record.state));
      row.appendChild(stateCell);
      row.appendChild(el("td", {}, String(record.revision)));
      row.appendChild(el("td", {}, formatStamp(record.updated)));
      row.appendChild(el("td", { class: "cid-cell" }, record.cid));
      table.appendChild(row);
    }
    this.body.appendChild(table);

    const pager = el("div", { class: "pager" });
    const prev = el("button", { type: "button" }, "Prev");
    prev.disabled = this.offset === 0;
    prev.addEventListener("click", () => {
      this.offset = Math.max(0, this.offset - PAGE_SIZE);
      void this.load();
    });
    const next = el("button", { type: "button" }, "Next");
    next.disabled = this.offset + PAGE_SIZE >= total;
    next.addEventListener("click", () => {
      this.offset += PAGE_SIZE;
      void this.load();
    });
    pager.appendChild(prev);
    pager.appendChild(
      el("span", { class: "pager-label" }, ` ${this.offset + 1} to ${Math.min(this.offset + PAGE_SIZE, total)} of ${total} `),
    );
    pager.appendChild(next);
    this.body.appendChild(pager);
  }
}
