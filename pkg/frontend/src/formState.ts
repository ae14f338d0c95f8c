// Pure form logic: which combinations the catalog declares valid, and the
// canonical query body. Controls for invalid combinations are disabled by
// offering empty/filtered option lists, so they cannot be submitted.

import type { Catalog, CatalogSource, CatalogVariable, QueryFormState } from "./types.js";

export const FIXED_BASE_KINDS = ["population", "nightlight", "cropland"];

function source(catalog: Catalog, name: string): CatalogSource | undefined {
  return catalog.sources.find((s) => s.name === name);
}

function variable(catalog: Catalog, sourceName: string, variableName: string): CatalogVariable | undefined {
  return source(catalog, sourceName)?.variables.find((v) => v.name === variableName);
}

export function sourceOptions(catalog: Catalog): string[] {
  return catalog.sources.map((s) => s.name);
}

export function variableOptions(catalog: Catalog, sourceName: string): string[] {
  return source(catalog, sourceName)?.variables.map((v) => v.name) ?? [];
}

export function thresholdAvailable(catalog: Catalog, sourceName: string): boolean {
  const s = source(catalog, sourceName);
  return s?.native_frequency === catalog.thresholds.requires_native_frequency;
}

/** Frequencies the catalog permits for this source/variable, narrowed to the
 * threshold periods when thresholding is on. An unavailable combination
 * yields an empty list, which the UI renders as a disabled control. */
export function frequencyOptions(
  catalog: Catalog,
  sourceName: string,
  variableName: string,
  thresholdEnabled = false,
): string[] {
  const v = variable(catalog, sourceName, variableName);
  if (!v) return [];
  if (!thresholdEnabled) return [...v.frequencies];
  if (!thresholdAvailable(catalog, sourceName)) return [];
  return v.frequencies.filter((f) => catalog.thresholds.periods.includes(f));
}

export function weightOptions(catalog: Catalog): string[] {
  return catalog.weights.map((w) => w.kind);
}

export function baseYearOptions(catalog: Catalog, weightKind: string): number[] {
  if (!FIXED_BASE_KINDS.includes(weightKind)) return [];
  return catalog.weights.find((w) => w.kind === weightKind)?.base_years ?? [];
}

export function yearBounds(
  catalog: Catalog,
  sourceName: string,
  variableName: string,
): [number, number] | null {
  const v = variable(catalog, sourceName, variableName);
  return v ? [v.years[0], v.years[1]] : null;
}

export interface Violation {
  field: string;
  message: string;
}

export function validateForm(catalog: Catalog, form: QueryFormState): Violation[] {
  const violations: Violation[] = [];
  if (!source(catalog, form.source)) {
    violations.push({ field: "source", message: `unknown source ${form.source}` });
    return violations;
  }
  if (!variable(catalog, form.source, form.variable)) {
    violations.push({ field: "variable", message: `${form.source} has no ${form.variable}` });
    return violations;
  }
  const frequencies = frequencyOptions(catalog, form.source, form.variable, form.threshold.enabled);
  if (!frequencies.includes(form.frequency)) {
    violations.push({
      field: "frequency",
      message: `${form.frequency} not available for ${form.variable} from ${form.source}`,
    });
  }
  if (!catalog.levels.includes(form.level)) {
    violations.push({ field: "level", message: `level ${form.level} not available` });
  }
  const baseYears = baseYearOptions(catalog, form.weightKind);
  if (FIXED_BASE_KINDS.includes(form.weightKind)) {
    if (form.baseYear === null || !baseYears.includes(form.baseYear)) {
      violations.push({ field: "baseYear", message: `base year required: one of ${baseYears.join(", ")}` });
    }
  } else if (form.baseYear !== null) {
    violations.push({ field: "baseYear", message: `${form.weightKind} takes no base year` });
  }
  const bounds = yearBounds(catalog, form.source, form.variable);
  if (bounds) {
    if (form.yearFrom > form.yearTo) {
      violations.push({ field: "years", message: "empty year range" });
    } else if (form.yearFrom < bounds[0] || form.yearTo > bounds[1]) {
      violations.push({
        field: "years",
        message: `coverage is ${bounds[0]}..${bounds[1]}`,
      });
    }
  }
  if (form.threshold.enabled) {
    if (!thresholdAvailable(catalog, form.source)) {
      violations.push({ field: "threshold", message: `${form.source} has no daily data for thresholds` });
    }
    if (form.threshold.mode === "relative" && !(form.threshold.value > 0 && form.threshold.value < 100)) {
      violations.push({ field: "threshold", message: "percentile must lie in (0, 100)" });
    }
    if (!Number.isFinite(form.threshold.value)) {
      violations.push({ field: "threshold", message: "threshold value required" });
    }
  }
  return violations;
}

export function canSubmit(catalog: Catalog, form: QueryFormState): boolean {
  return validateForm(catalog, form).length === 0;
}

/** Canonical request body: stable key order, lowercase strings, threshold
 * only when enabled. Identical forms stringify identically, which backs the
 * client-side result cache. */
export function toQueryBody(form: QueryFormState): Record<string, unknown> {
  const body: Record<string, unknown> = {
    source: form.source.toLowerCase(),
    variable: form.variable.toLowerCase(),
    level: form.level.toLowerCase(),
    weight: form.weightKind.toLowerCase(),
    base_year: form.baseYear,
    frequency: form.frequency.toLowerCase(),
    year_from: form.yearFrom,
    year_to: form.yearTo,
  };
  if (form.threshold.enabled) {
    body.threshold = {
      mode: form.threshold.mode,
      direction: form.threshold.direction,
      value: form.threshold.value,
      baseline_from: form.threshold.baselineFrom,
      baseline_to: form.threshold.baselineTo,
      period: form.frequency.toLowerCase(),
    };
  }
  return body;
}

export function defaultForm(catalog: Catalog): QueryFormState {
  const s = catalog.sources[0];
  const v = s?.variables[0];
  return {
    source: s?.name ?? "",
    variable: v?.name ?? "",
    level: catalog.levels[0] ?? "gadm0",
    weightKind: "unweighted",
    baseYear: null,
    frequency: v?.frequencies[0] ?? "annual",
    yearFrom: v?.years[0] ?? 2000,
    yearTo: v?.years[1] ?? 2000,
    threshold: {
      enabled: false,
      mode: "absolute",
      direction: "above",
      value: 0,
      baselineFrom: null,
      baselineTo: null,
    },
    selectedPeriod: null,
    pending: false,
    resultId: null,
  };
}
