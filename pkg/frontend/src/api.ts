// Thin typed client over the service HTTP API. Server error bodies are
// surfaced verbatim so the UI can show the service's own message.

import type { AggregateResponse, Catalog, GeoPreview, ServiceErrorBody } from "./types.js";

export class ApiServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiServiceError";
  }
}

async function parseError(response: Response): Promise<never> {
  let code = "http_error";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = (await response.json()) as ServiceErrorBody;
    if (body?.error) {
      code = body.error.code;
      message = body.error.message;
    }
  } catch {
    // non-JSON error body; keep the generic message
  }
  throw new ApiServiceError(response.status, code, message);
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, "")}${path}`;
  }

  async catalog(): Promise<Catalog> {
    const r = await this.fetchFn(this.url("/api/v1/catalog"));
    if (!r.ok) await parseError(r);
    return (await r.json()) as Catalog;
  }

  async aggregate(body: Record<string, unknown>, signal?: AbortSignal): Promise<AggregateResponse> {
    const r = await this.fetchFn(this.url("/api/v1/aggregate"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
    if (!r.ok) await parseError(r);
    return (await r.json()) as AggregateResponse;
  }

  async previewGeo(id: string, period?: string): Promise<GeoPreview> {
    const query = period ? `?id=${encodeURIComponent(id)}&period=${encodeURIComponent(period)}` : `?id=${encodeURIComponent(id)}`;
    const r = await this.fetchFn(this.url(`/api/v1/preview/geo${query}`));
    if (!r.ok) await parseError(r);
    return (await r.json()) as GeoPreview;
  }

  downloadUrl(id: string, layout: string, format: string): string {
    return this.url(
      `/api/v1/download?id=${encodeURIComponent(id)}&layout=${encodeURIComponent(layout)}&format=${encodeURIComponent(format)}`,
    );
  }

  async fetchDownload(id: string, layout: string, format: string): Promise<ArrayBuffer> {
    const r = await this.fetchFn(this.downloadUrl(id, layout, format));
    if (!r.ok) await parseError(r);
    return await r.arrayBuffer();
  }
}
