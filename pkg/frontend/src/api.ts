/** Typed client for the contribution service REST API.
 *
 * Every page talks to the service through this module, so the wire contract
 * appears exactly once in the viewer.  The shapes mirror docs/api.md in the
 * main repository; nothing here recomputes what the service already derived.
 */

export type State = "staged" | "approved" | "released" | "rejected";

export interface TablePayload {
  columns: string[];
  rows: (number | string)[][];
}

export interface SectionPayload {
  name: string;
  entries?: [string, string][];
  table?: TablePayload;
  children?: SectionPayload[];
}

export interface AuditEntry {
  account: string | null;
  at: number;
  action: string;
  from: string | null;
  to: string;
}

export interface RecordPayload {
  cid: string;
  name: string;
  identifier: string;
  project: string | null;
  contributor: string;
  state: State;
  revision: number;
  created: number;
  updated: number;
  audit: AuditEntry[];
  tree: SectionPayload;
  tables: Record<string, { path: string[] } & TablePayload>;
  mpfile: string;
}

export interface ListPayload {
  total: number;
  limit: number;
  offset: number;
  results: RecordPayload[];
}

export interface GridPayload {
  x: string;
  y: string;
  x_edges: number[];
  y_edges: number[];
  /** column-major: counts[ix][iy] */
  counts: number[][];
  total: number;
  artifact?: string;
}

export interface RegionPayload {
  ids: string[];
  count: number;
}

export interface StatePatchResponse {
  cid: string;
  state: State;
  revision: number;
}

/** A non-2xx response, carrying the service's `detail` message. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

interface ClientOptions {
  base?: string;
  apiKey?: string | null;
}

// Same-origin by default: the bundle is served by the API process at /ui.
let baseUrl = "";
let apiKey: string | null = null;

export function configure(opts: ClientOptions): void {
  if (opts.base !== undefined) baseUrl = opts.base.replace(/\/$/, "");
  if (opts.apiKey !== undefined) apiKey = opts.apiKey || null;
}

export function currentApiKey(): string | null {
  return apiKey;
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const headers = new Headers(init?.headers);
  if (apiKey) headers.set("X-API-KEY", apiKey);
  const resp = await fetch(baseUrl + path, { ...init, headers });
  const text = await resp.text();
  let data: unknown = null;
  if (text) {
    try {
      data = JSON.parse(text);
    } catch {
      // non-JSON error body; fall through with the raw text
      data = null;
    }
  }
  if (!resp.ok) {
    const detail =
      data && typeof data === "object" && "detail" in data
        ? String((data as { detail: unknown }).detail)
        : text || `HTTP ${resp.status}`;
    throw new ApiError(resp.status, detail);
  }
  return data as T;
}

function query(params: Record<string, string | number | undefined>): string {
  const search = new URLSearchParams();
  for (const [key, value] of Object.entries(params)) {
    if (value !== undefined && value !== "") search.set(key, String(value));
  }
  const encoded = search.toString();
  return encoded ? `?${encoded}` : "";
}

export function getContribution(cid: string): Promise<RecordPayload> {
  return request(`/api/v1/contributions/${encodeURIComponent(cid)}`);
}

export function listContributions(params: {
  project?: string;
  state?: string;
  identifier?: string;
  limit?: number;
  offset?: number;
}): Promise<ListPayload> {
  return request(`/api/v1/contributions${query(params)}`);
}

export function patchState(cid: string, state: State): Promise<StatePatchResponse> {
  return request(`/api/v1/contributions/${encodeURIComponent(cid)}/state`, {
    method: "PATCH",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ state }),
  });
}

export function getGrid(params: {
  x: string;
  y: string;
  project?: string;
  nx?: number;
  ny?: number;
}): Promise<GridPayload> {
  return request(`/api/v1/index/grid${query(params)}`);
}

export function getRegion(params: {
  x: string;
  y: string;
  x0: number;
  x1: number;
  y0: number;
  y1: number;
  project?: string;
  nx?: number;
  ny?: number;
}): Promise<RegionPayload> {
  return request(`/api/v1/index/region${query(params)}`);
}
