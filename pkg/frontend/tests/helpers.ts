/** Shared test plumbing: a routable fake fetch that records every call. */

export interface FetchCall {
  url: URL;
  method: string;
  headers: Record<string, string>;
  body: string | null;
}

export interface FakeResponse {
  status?: number;
  body: unknown;
}

type Handler = (call: FetchCall) => FakeResponse | Promise<FakeResponse> | undefined;

export interface FakeFetch {
  calls: FetchCall[];
  restore(): void;
}

/** Replace global fetch with `handler`; unrouted requests throw so a test
 * can never silently hit a real network. */
export function installFetch(handler: Handler): FakeFetch {
  const original = globalThis.fetch;
  const calls: FetchCall[] = [];
  globalThis.fetch = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = new URL(String(input), "http://viewer.test");
    const headers: Record<string, string> = {};
    new Headers(init?.headers).forEach((value, key) => {
      headers[key] = value;
    });
    const call: FetchCall = {
      url,
      method: (init?.method ?? "GET").toUpperCase(),
      headers,
      body: typeof init?.body === "string" ? init.body : null,
    };
    calls.push(call);
    const routed = await handler(call);
    if (routed === undefined) {
      throw new Error(`unrouted request: ${call.method} ${url.pathname}${url.search}`);
    }
    return new Response(JSON.stringify(routed.body), {
      status: routed.status ?? 200,
      headers: { "content-type": "application/json" },
    });
  }) as typeof fetch;
  return {
    calls,
    restore() {
      globalThis.fetch = original;
    },
  };
}

/** Let queued microtasks and zero-delay timers run. */
export function settle(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
