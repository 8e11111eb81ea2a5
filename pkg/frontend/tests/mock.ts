// In-memory stand-in for the service: a route table plus a call log. Any
// request outside the registered routes rejects, so a test that grants
// only GETs also proves the widget under test never wrote anywhere else.

import { vi } from "vitest";

export interface RecordedCall {
  method: string;
  path: string;
  body: unknown;
}

type Stub = { status: number; json: unknown } | ((body: unknown) => { status: number; json: unknown });

export function ok(payload: unknown): { status: number; json: unknown } {
  return { status: 200, json: { status: "ok", payload } };
}

export function fail(
  status: number,
  code: string,
  message: string,
  detail: unknown = null,
): { status: number; json: unknown } {
  return { status, json: { status: "error", error: { code, message, detail } } };
}

export class FakeService {
  calls: RecordedCall[] = [];
  private routes = new Map<string, Stub>();

  on(method: string, path: string, stub: Stub): this {
    this.routes.set(`${method} ${path}`, stub);
    return this;
  }

  install(): this {
    vi.stubGlobal("fetch", (input: string, init?: { method?: string; body?: string }) => {
      const method = init?.method ?? "GET";
      const body = init?.body ? JSON.parse(init.body) : undefined;
      this.calls.push({ method, path: input, body });
      const stub = this.routes.get(`${method} ${input}`);
      if (!stub) {
        return Promise.reject(new Error(`no route for ${method} ${input}`));
      }
      const { status, json } = typeof stub === "function" ? stub(body) : stub;
      // a fresh tree per response, as response.json() would give
      return Promise.resolve({ status, json: () => Promise.resolve(structuredClone(json)) });
    });
    return this;
  }

  posts(): RecordedCall[] {
    return this.calls.filter((call) => call.method === "POST");
  }
}

/** Spin until `check` passes; covers fire-and-forget refreshes after acks. */
export async function until(check: () => boolean, tries = 1000): Promise<void> {
  for (let i = 0; i < tries; i += 1) {
    if (check()) return;
    await new Promise((resolve) => setTimeout(resolve, 1));
  }
  throw new Error("condition not met in time");
}

export function fire(target: Element, type: string): void {
  target.dispatchEvent(new Event(type, { bubbles: true }));
}
