// Submission state: one in-flight aggregate request at a time, responses
// cached by canonical query body (and thereby by result id), stale
// responses discarded by sequence token.

import { ApiClient } from "./api.js";
import { canSubmit, toQueryBody, validateForm } from "./formState.js";
import type { AggregateResponse, Catalog, GeoPreview, QueryFormState } from "./types.js";

export type SubmitOutcome =
  | { kind: "ok"; response: AggregateResponse; fromCache: boolean }
  | { kind: "error"; code: string; message: string }
  | { kind: "stale" }
  | { kind: "blocked"; reasons: string[] };

export class DashboardStore {
  private cache = new Map<string, AggregateResponse>();
  private geoCache = new Map<string, GeoPreview>();
  private sequence = 0;
  private controller: AbortController | null = null;
  fetchCount = 0;

  constructor(
    private readonly api: ApiClient,
    readonly catalog: Catalog,
  ) {}

  cachedResponse(form: QueryFormState): AggregateResponse | undefined {
    return this.cache.get(JSON.stringify(toQueryBody(form)));
  }

  async submit(form: QueryFormState): Promise<SubmitOutcome> {
    if (!canSubmit(this.catalog, form)) {
      const reasons = validateForm(this.catalog, form).map((v) => v.message);
      return { kind: "blocked", reasons };
    }
    const key = JSON.stringify(toQueryBody(form));
    const cached = this.cache.get(key);
    if (cached) {
      return { kind: "ok", response: cached, fromCache: true };
    }
    // one in-flight aggregate per form: cancel the previous request
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    const ticket = ++this.sequence;
    try {
      this.fetchCount += 1;
      const response = await this.api.aggregate(toQueryBody(form), controller.signal);
      if (ticket !== this.sequence) {
        return { kind: "stale" };
      }
      this.cache.set(key, response);
      return { kind: "ok", response, fromCache: false };
    } catch (err) {
      if (ticket !== this.sequence) {
        return { kind: "stale" };
      }
      if (err instanceof Error && err.name === "AbortError") {
        return { kind: "stale" };
      }
      const anyErr = err as { code?: string; message?: string };
      return {
        kind: "error",
        code: anyErr.code ?? "network_error",
        message: anyErr.message ?? String(err),
      };
    }
  }

  async geoPreview(id: string, period: string): Promise<GeoPreview> {
    const key = `${id}::${period}`;
    const cached = this.geoCache.get(key);
    if (cached) return cached;
    const geo = await this.api.previewGeo(id, period);
    this.geoCache.set(key, geo);
    return geo;
  }
}
