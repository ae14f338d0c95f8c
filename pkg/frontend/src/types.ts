// Shapes of the service API payloads and of the dashboard form state.

export interface CatalogVariable {
  name: string;
  units: string;
  frequencies: string[];
  years: [number, number];
}

export interface CatalogSource {
  name: string;
  native_frequency: string;
  resolution: number;
  years: [number, number];
  variables: CatalogVariable[];
}

export interface CatalogWeight {
  kind: string;
  base_years: number[];
}

export interface Catalog {
  sources: CatalogSource[];
  levels: string[];
  weights: CatalogWeight[];
  layouts: string[];
  formats: string[];
  thresholds: {
    modes: string[];
    directions: string[];
    periods: string[];
    requires_native_frequency: string;
  };
}

export type ThresholdMode = "absolute" | "relative" | "cumulative";

export interface ThresholdForm {
  enabled: boolean;
  mode: ThresholdMode;
  direction: "above" | "below";
  value: number;
  baselineFrom: number | null;
  baselineTo: number | null;
}

export interface QueryFormState {
  source: string;
  variable: string;
  level: string;
  weightKind: string;
  baseYear: number | null;
  frequency: string;
  yearFrom: number;
  yearTo: number;
  threshold: ThresholdForm;
  // UI state
  selectedPeriod: string | null;
  pending: boolean;
  resultId: string | null;
}

export interface PreviewRow {
  unit_id: string;
  period: string;
  value: number | null;
}

export interface AggregateResponse {
  id: string;
  level: string;
  frequency: string;
  periods: string[];
  units: string[];
  preview: PreviewRow[];
}

export interface GeoFeature {
  type: "Feature";
  geometry: { type: "MultiPolygon"; coordinates: number[][][][] };
  properties: { unit_id: string; name: string; value: number | null; na: boolean };
}

export interface GeoPreview {
  type: "FeatureCollection";
  features: GeoFeature[];
  period: string;
  id: string;
}

export interface ServiceErrorBody {
  error: { code: string; message: string };
}
