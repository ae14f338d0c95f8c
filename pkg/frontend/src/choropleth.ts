// Choropleth rendering straight from the service's GeoJSON: project, color,
// legend. No geometry processing beyond an equirectangular screen mapping.
// NA units get a hatched neutral fill instead of a ramp color.

import type { GeoFeature, GeoPreview } from "./types.js";

export interface LegendBounds {
  min: number;
  max: number;
}

/** Legend bounds are exactly the min/max of the displayed non-NA values. */
export function legendBounds(features: GeoFeature[]): LegendBounds | null {
  const values = features
    .map((f) => f.properties.value)
    .filter((v): v is number => v !== null && Number.isFinite(v));
  if (values.length === 0) return null;
  return { min: Math.min(...values), max: Math.max(...values) };
}

const RAMP_LOW = [44, 123, 182];
const RAMP_HIGH = [215, 25, 28];

export function colorFor(value: number, bounds: LegendBounds): string {
  const span = bounds.max - bounds.min;
  const t = span > 0 ? (value - bounds.min) / span : 0.5;
  const rgb = RAMP_LOW.map((lo, i) => Math.round(lo + t * ((RAMP_HIGH[i] ?? lo) - lo)));
  return `rgb(${rgb[0]},${rgb[1]},${rgb[2]})`;
}

function geoBBox(features: GeoFeature[]): [number, number, number, number] {
  let lonMin = Infinity, latMin = Infinity, lonMax = -Infinity, latMax = -Infinity;
  for (const f of features) {
    for (const polygon of f.geometry.coordinates) {
      for (const ring of polygon) {
        for (const pt of ring) {
          const [lon, lat] = pt;
          if (lon === undefined || lat === undefined) continue;
          lonMin = Math.min(lonMin, lon);
          lonMax = Math.max(lonMax, lon);
          latMin = Math.min(latMin, lat);
          latMax = Math.max(latMax, lat);
        }
      }
    }
  }
  return [lonMin, latMin, lonMax, latMax];
}

function escapeXml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

function featurePath(
  feature: GeoFeature,
  project: (lon: number, lat: number) => [number, number],
): string {
  const parts: string[] = [];
  for (const polygon of feature.geometry.coordinates) {
    for (const ring of polygon) {
      const cmds = ring
        .map((pt, i) => {
          const [x, y] = project(pt[0] ?? 0, pt[1] ?? 0);
          return `${i === 0 ? "M" : "L"}${x.toFixed(2)},${y.toFixed(2)}`;
        })
        .join("");
      parts.push(cmds + "Z");
    }
  }
  return parts.join("");
}

/** Render the FeatureCollection as a standalone SVG string. Each unit is one
 * path carrying data-unit-id and data-value attributes so every rendered
 * number is traceable to the service response. */
export function renderChoropleth(geo: GeoPreview, width = 640, height = 420): string {
  const features = geo.features;
  const bounds = legendBounds(features);
  const [lonMin, latMin, lonMax, latMax] = geoBBox(features);
  const pad = 10;
  const lonSpan = Math.max(lonMax - lonMin, 1e-9);
  const latSpan = Math.max(latMax - latMin, 1e-9);
  const scale = Math.min((width - 2 * pad) / lonSpan, (height - 60 - 2 * pad) / latSpan);
  const project = (lon: number, lat: number): [number, number] => [
    pad + (lon - lonMin) * scale,
    pad + (latMax - lat) * scale,
  ];

  const paths = features
    .map((f) => {
      const d = featurePath(f, project);
      const props = f.properties;
      const title = `${props.unit_id} ${props.name}: ${props.na ? "NA" : props.value}`;
      if (props.na || props.value === null || bounds === null) {
        return (
          `<path class="unit na" data-unit-id="${escapeXml(props.unit_id)}" data-value="" ` +
          `d="${d}" fill="url(#na-hatch)" stroke="#555"><title>${escapeXml(title)}</title></path>`
        );
      }
      return (
        `<path class="unit" data-unit-id="${escapeXml(props.unit_id)}" ` +
        `data-value="${props.value}" d="${d}" fill="${colorFor(props.value, bounds)}" ` +
        `stroke="#333"><title>${escapeXml(title)}</title></path>`
      );
    })
    .join("");

  const legend = bounds
    ? `<g class="legend" transform="translate(${pad},${height - 40})">` +
      `<rect x="0" y="0" width="220" height="12" fill="url(#ramp)"/>` +
      `<text class="legend-min" x="0" y="26" font-size="11">${bounds.min}</text>` +
      `<text class="legend-max" x="220" y="26" font-size="11" text-anchor="end">${bounds.max}</text>` +
      `</g>`
    : `<g class="legend"><text x="${pad}" y="${height - 24}" font-size="11">all values NA</text></g>`;

  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" ` +
    `width="${width}" height="${height}" role="img">` +
    `<defs>` +
    `<pattern id="na-hatch" width="6" height="6" patternUnits="userSpaceOnUse" patternTransform="rotate(45)">` +
    `<rect width="6" height="6" fill="#e8e8e8"/><line x1="0" y1="0" x2="0" y2="6" stroke="#9a9a9a" stroke-width="2"/>` +
    `</pattern>` +
    `<linearGradient id="ramp"><stop offset="0" stop-color="rgb(44,123,182)"/>` +
    `<stop offset="1" stop-color="rgb(215,25,28)"/></linearGradient>` +
    `</defs>` +
    `<g class="period" data-period="${escapeXml(geo.period)}">${paths}</g>` +
    legend +
    `</svg>`
  );
}
