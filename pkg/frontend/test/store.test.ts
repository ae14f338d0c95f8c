import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { defaultForm } from "../src/formState.js";
import { DashboardStore } from "../src/store.js";
import { CATALOG } from "./fixtures.js";

function okResponse(body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status: 200,
    headers: { "content-type": "application/json" },
  });
}

const RESULT = {
  id: "abc123",
  level: "gadm1",
  frequency: "annual",
  periods: ["2000", "2001"],
  units: ["AAA.1_1"],
  preview: [{ unit_id: "AAA.1_1", period: "2000", value: 1.5 }],
};

describe("submission store", () => {
  it("re-submitting an identical form performs no duplicate network fetch", async () => {
    let calls = 0;
    const fetchFn: typeof fetch = async () => {
      calls += 1;
      return okResponse(RESULT);
    };
    const store = new DashboardStore(new ApiClient("http://x", fetchFn), CATALOG);
    const form = defaultForm(CATALOG);
    const first = await store.submit(form);
    const second = await store.submit({ ...form });
    expect(first.kind).toBe("ok");
    expect(second.kind).toBe("ok");
    expect(second.kind === "ok" && second.fromCache).toBe(true);
    expect(calls).toBe(1);
    expect(store.fetchCount).toBe(1);
  });

  it("different forms fetch separately", async () => {
    let calls = 0;
    const fetchFn: typeof fetch = async () => {
      calls += 1;
      return okResponse({ ...RESULT, id: `id${calls}` });
    };
    const store = new DashboardStore(new ApiClient("http://x", fetchFn), CATALOG);
    await store.submit(defaultForm(CATALOG));
    await store.submit({ ...defaultForm(CATALOG), level: "gadm1" });
    expect(calls).toBe(2);
  });

  it("stale responses are discarded: only the latest submission wins", async () => {
    const resolvers: ((r: Response) => void)[] = [];
    const fetchFn: typeof fetch = (_url, init) =>
      new Promise<Response>((resolve, reject) => {
        init?.signal?.addEventListener("abort", () =>
          reject(Object.assign(new Error("aborted"), { name: "AbortError" })),
        );
        resolvers.push(resolve);
      });
    const store = new DashboardStore(new ApiClient("http://x", fetchFn), CATALOG);
    const slow = store.submit(defaultForm(CATALOG));
    const fast = store.submit({ ...defaultForm(CATALOG), level: "gadm1" });
    resolvers[1]!(okResponse({ ...RESULT, id: "second" }));
    const fastOutcome = await fast;
    expect(fastOutcome.kind).toBe("ok");
    expect(fastOutcome.kind === "ok" && fastOutcome.response.id).toBe("second");
    const slowOutcome = await slow; // aborted by the second submission
    expect(slowOutcome.kind).toBe("stale");
  });

  it("invalid forms are blocked before any network call", async () => {
    let calls = 0;
    const fetchFn: typeof fetch = async () => {
      calls += 1;
      return okResponse(RESULT);
    };
    const store = new DashboardStore(new ApiClient("http://x", fetchFn), CATALOG);
    const outcome = await store.submit({
      ...defaultForm(CATALOG),
      source: "csic",
      variable: "spei",
      frequency: "annual",
      yearFrom: 2001,
      yearTo: 2001,
    });
    expect(outcome.kind).toBe("blocked");
    expect(calls).toBe(0);
  });

  it("service errors surface code and message verbatim", async () => {
    const fetchFn: typeof fetch = async () =>
      new Response(
        JSON.stringify({
          error: { code: "spei_monthly_only", message: "spei cannot be annual" },
        }),
        { status: 400 },
      );
    const store = new DashboardStore(new ApiClient("http://x", fetchFn), CATALOG);
    const outcome = await store.submit(defaultForm(CATALOG));
    expect(outcome).toEqual({
      kind: "error",
      code: "spei_monthly_only",
      message: "spei cannot be annual",
    });
  });
});
