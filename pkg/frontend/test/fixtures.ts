// Hand-written catalog and geo payloads shaped like real service responses.

import type { Catalog, GeoPreview, PreviewRow } from "../src/types.js";

export const CATALOG: Catalog = {
  sources: [
    {
      name: "era5",
      native_frequency: "daily",
      resolution: 0.25,
      years: [2000, 2001],
      variables: [
        {
          name: "temperature_avg",
          units: "degC",
          frequencies: ["daily", "monthly", "annual"],
          years: [2000, 2001],
        },
        {
          name: "precipitation",
          units: "mm",
          frequencies: ["daily", "monthly", "annual"],
          years: [2000, 2001],
        },
      ],
    },
    {
      name: "csic",
      native_frequency: "monthly",
      resolution: 0.5,
      years: [2000, 2003],
      variables: [
        { name: "spei", units: "", frequencies: ["monthly"], years: [2000, 2003] },
      ],
    },
    {
      name: "cru_ts",
      native_frequency: "monthly",
      resolution: 0.5,
      years: [2000, 2003],
      variables: [
        {
          name: "temperature_avg",
          units: "degC",
          frequencies: ["monthly", "annual"],
          years: [2000, 2003],
        },
      ],
    },
  ],
  levels: ["gadm0", "gadm1"],
  weights: [
    { kind: "unweighted", base_years: [] },
    { kind: "population", base_years: [2000, 2005] },
    { kind: "nightlight", base_years: [2015] },
    { kind: "cropland", base_years: [2000] },
    { kind: "concurrent", base_years: [2000] },
  ],
  layouts: ["wide", "long"],
  formats: ["csv", "json", "parquet"],
  thresholds: {
    modes: ["absolute", "relative", "cumulative"],
    directions: ["above", "below"],
    periods: ["monthly", "annual"],
    requires_native_frequency: "daily",
  },
};

function square(lonW: number, latS: number): number[][][][] {
  return [
    [
      [
        [lonW, latS],
        [lonW + 1, latS],
        [lonW + 1, latS + 1],
        [lonW, latS + 1],
        [lonW, latS],
      ],
    ],
  ];
}

export const GEO: GeoPreview = {
  type: "FeatureCollection",
  period: "2000",
  id: "res1",
  features: [
    {
      type: "Feature",
      geometry: { type: "MultiPolygon", coordinates: square(4, 42) },
      properties: { unit_id: "AAA.1_1", name: "North A", value: 9.5, na: false },
    },
    {
      type: "Feature",
      geometry: { type: "MultiPolygon", coordinates: square(4, 40) },
      properties: { unit_id: "AAA.2_1", name: "South A", value: null, na: true },
    },
    {
      type: "Feature",
      geometry: { type: "MultiPolygon", coordinates: square(7, 42) },
      properties: { unit_id: "BBB.1_1", name: "North B", value: 12.25, na: false },
    },
    {
      type: "Feature",
      geometry: { type: "MultiPolygon", coordinates: square(8, 40) },
      properties: { unit_id: "BBB.2_1", name: "Dead Zone", value: 10.0, na: false },
    },
  ],
};

export const PREVIEW_ROWS: PreviewRow[] = [
  { unit_id: "AAA.1_1", period: "2000", value: 9.5 },
  { unit_id: "AAA.1_1", period: "2001", value: 9.75 },
  { unit_id: "AAA.2_1", period: "2000", value: null },
  { unit_id: "AAA.2_1", period: "2001", value: null },
  { unit_id: "BBB.1_1", period: "2000", value: 12.25 },
  { unit_id: "BBB.1_1", period: "2001", value: 12.0 },
];
