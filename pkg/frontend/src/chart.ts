// Per-unit time-series chart from the inline long-layout preview rows.
// NA values break the line into segments; every plotted point carries the
// service-provided value.

import type { PreviewRow } from "./types.js";

const SERIES_COLORS = ["#1b6ca8", "#d1495b", "#3a8f5f", "#8d6b94", "#c7851f", "#4f6d7a"];

export interface SeriesChartOptions {
  width?: number;
  height?: number;
  maxUnits?: number;
}

export function seriesByUnit(rows: PreviewRow[]): Map<string, PreviewRow[]> {
  const grouped = new Map<string, PreviewRow[]>();
  for (const row of rows) {
    const bucket = grouped.get(row.unit_id) ?? [];
    bucket.push(row);
    grouped.set(row.unit_id, bucket);
  }
  return grouped;
}

export function renderSeriesChart(
  rows: PreviewRow[],
  periods: string[],
  options: SeriesChartOptions = {},
): string {
  const { width = 640, height = 260, maxUnits = 6 } = options;
  const grouped = [...seriesByUnit(rows).entries()].slice(0, maxUnits);
  const values = rows
    .map((r) => r.value)
    .filter((v): v is number => v !== null && Number.isFinite(v));
  const pad = { left: 46, right: 10, top: 10, bottom: 28 };
  const innerW = width - pad.left - pad.right;
  const innerH = height - pad.top - pad.bottom;

  if (values.length === 0 || periods.length === 0) {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}">` +
      `<text x="${width / 2}" y="${height / 2}" text-anchor="middle" font-size="12">no data</text></svg>`
    );
  }
  const vMin = Math.min(...values);
  const vMax = Math.max(...values);
  const vSpan = vMax - vMin || 1;
  const x = (i: number) => pad.left + (periods.length === 1 ? innerW / 2 : (i * innerW) / (periods.length - 1));
  const y = (v: number) => pad.top + innerH - ((v - vMin) / vSpan) * innerH;

  const periodIndex = new Map(periods.map((p, i) => [p, i]));
  const series = grouped
    .map(([unitId, unitRows], k) => {
      const color = SERIES_COLORS[k % SERIES_COLORS.length];
      const segments: string[][] = [[]];
      for (const row of unitRows) {
        const i = periodIndex.get(row.period);
        if (i === undefined) continue;
        if (row.value === null) {
          if (segments[segments.length - 1]!.length > 0) segments.push([]);
          continue;
        }
        segments[segments.length - 1]!.push(`${x(i).toFixed(2)},${y(row.value).toFixed(2)}`);
      }
      const lines = segments
        .filter((points) => points.length > 0)
        .map(
          (points) =>
            `<polyline class="series" data-unit-id="${unitId}" fill="none" ` +
            `stroke="${color}" stroke-width="1.8" points="${points.join(" ")}"/>`,
        )
        .join("");
      const label =
        `<text class="series-label" x="${width - pad.right}" y="${pad.top + 14 * (k + 1)}" ` +
        `text-anchor="end" font-size="11" fill="${color}">${unitId}</text>`;
      return lines + label;
    })
    .join("");

  const axis =
    `<text class="axis-min" x="${pad.left - 6}" y="${y(vMin).toFixed(2)}" text-anchor="end" font-size="10">${vMin}</text>` +
    `<text class="axis-max" x="${pad.left - 6}" y="${y(vMax).toFixed(2)}" text-anchor="end" font-size="10">${vMax}</text>` +
    `<text x="${pad.left}" y="${height - 8}" font-size="10">${periods[0]}</text>` +
    `<text x="${width - pad.right}" y="${height - 8}" text-anchor="end" font-size="10">${periods[periods.length - 1]}</text>`;

  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" ` +
    `width="${width}" height="${height}" role="img">${series}${axis}</svg>`
  );
}
