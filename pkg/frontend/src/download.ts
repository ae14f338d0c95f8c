// Download helpers: filenames summarize the query (source, variable, level,
// weighting, year span); the click path goes straight at the service URL.

import type { QueryFormState } from "./types.js";

export function buildFilename(form: QueryFormState, layout: string, format: string): string {
  const parts = [form.source, form.variable, form.level, form.weightKind];
  if (form.baseYear !== null) parts.push(String(form.baseYear));
  if (form.threshold.enabled) parts.push(`${form.threshold.mode}-${form.threshold.direction}`);
  parts.push(`${form.yearFrom}-${form.yearTo}`, layout);
  return `${parts.join("_")}.${format}`;
}

export function triggerDownload(doc: Document, url: string, filename: string): void {
  const anchor = doc.createElement("a");
  anchor.href = url;
  anchor.download = filename;
  doc.body.appendChild(anchor);
  anchor.click();
  anchor.remove();
}
