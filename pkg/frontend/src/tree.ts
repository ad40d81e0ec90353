/** Collapsible metadata tree.
 *
 * Every section renders as a node whose header toggles its body: key-value
 * entries first, child sections below.  Expansion state lives on the
 * TreeNode so a re-render keeps what the reader opened.
 */

import { el } from "./dom";
import type { TreeNode } from "./model";

export function renderTree(node: TreeNode): HTMLElement {
  const root = el("div", { class: "tree" });
  root.appendChild(renderNode(node));
  return root;
}

function renderNode(node: TreeNode): HTMLElement {
  const item = el("div", { class: "tree-node", "data-path": node.path });
  const hasBody = node.entries.length > 0 || node.children.length > 0;

  const header = el(
    "button",
    {
      class: "tree-toggle",
      type: "button",
      "aria-expanded": String(node.expanded),
    },
    el("span", { class: "tree-caret" }, hasBody ? (node.expanded ? "▾" : "▸") : "•"),
    el("span", { class: "tree-name" }, node.name),
  );
  item.appendChild(header);

  const body = el("div", { class: "tree-body" });
  if (node.entries.length > 0) {
    const list = el("dl", { class: "tree-entries" });
    for (const [key, value] of node.entries) {
      list.appendChild(el("dt", {}, key));
      list.appendChild(el("dd", {}, value));
    }
    body.appendChild(list);
  }
  for (const child of node.children) {
    body.appendChild(renderNode(child));
  }
  item.appendChild(body);

  const sync = () => {
    header.setAttribute("aria-expanded", String(node.expanded));
    body.style.display = node.expanded ? "" : "none";
    const caret = header.querySelector(".tree-caret");
    if (caret && hasBody) caret.textContent = node.expanded ? "▾" : "▸";
  };
  sync();

  if (hasBody) {
    header.addEventListener("click", () => {
      node.expanded = !node.expanded;
      sync();
    });
  }
  return item;
}
