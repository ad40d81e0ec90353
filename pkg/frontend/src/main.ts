/** Application shell: hash router plus the API key control.
 *
 * Routes:
 *   #/            contribution listing
 *   #/c/<cid>     contribution detail with review actions
 *   #/explore     grid and region explorer (optional ?project=&x=&y=)
 */

import { configure } from "./api";
import { clear, el } from "./dom";
import { DetailPage } from "./pages/detail";
import { ExplorerPage } from "./pages/explore";
import { ListPage } from "./pages/list";
import "./style.css";

const KEY_STORAGE = "contribkit.apiKey";

function storedKey(): string | null {
  try {
    return localStorage.getItem(KEY_STORAGE);
  } catch {
    return null;
  }
}

function rememberKey(value: string): void {
  try {
    if (value) localStorage.setItem(KEY_STORAGE, value);
    else localStorage.removeItem(KEY_STORAGE);
  } catch {
    // private windows may refuse storage; the key still applies in-memory
  }
}

function shell(root: HTMLElement): HTMLElement {
  const bar = el("header", { class: "topbar" });
  bar.appendChild(el("strong", { class: "brand" }, "Contribution Viewer"));
  const nav = el("nav", {});
  nav.appendChild(el("a", { href: "#/" }, "Contributions"));
  nav.appendChild(el("a", { href: "#/explore" }, "Explorer"));
  bar.appendChild(nav);

  const keyLabel = el("label", { class: "key-field" }, "API key ");
  const keyInput = el("input", {
    type: "password",
    placeholder: "anonymous",
    value: storedKey() ?? "",
  });
  keyInput.addEventListener("change", () => {
    rememberKey(keyInput.value);
    configure({ apiKey: keyInput.value || null });
    void route(outlet);
  });
  keyLabel.appendChild(keyInput);
  bar.appendChild(keyLabel);

  root.appendChild(bar);
  const outlet = el("main", { class: "outlet" });
  root.appendChild(outlet);
  return outlet;
}

export async function route(outlet: HTMLElement): Promise<void> {
  const hash = window.location.hash || "#/";
  clear(outlet);
  const detail = hash.match(/^#\/c\/(.+)$/);
  if (detail) {
    const page = new DetailPage(outlet, decodeURIComponent(detail[1]!));
    await page.load();
    return;
  }
  if (hash.startsWith("#/explore")) {
    const params = new URLSearchParams(hash.split("?")[1] ?? "");
    const page = new ExplorerPage(outlet, {
      project: params.get("project") ?? undefined,
      x: params.get("x") ?? undefined,
      y: params.get("y") ?? undefined,
    });
    if (params.get("x") && params.get("y")) await page.loadGrid();
    return;
  }
  const page = new ListPage(outlet);
  await page.load();
}

function start(): void {
  const root = document.getElementById("app");
  if (!root) return;
  configure({ apiKey: storedKey() });
  const outlet = shell(root);
  window.addEventListener("hashchange", () => {
    void route(outlet);
  });
  void route(outlet);
}

start();
