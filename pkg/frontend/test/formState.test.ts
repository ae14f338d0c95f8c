import { describe, expect, it } from "vitest";

import {
  baseYearOptions,
  canSubmit,
  defaultForm,
  frequencyOptions,
  thresholdAvailable,
  toQueryBody,
  validateForm,
  variableOptions,
} from "../src/formState.js";
import { CATALOG } from "./fixtures.js";

function form(overrides: Record<string, unknown> = {}) {
  const base = defaultForm(CATALOG);
  return { ...base, ...overrides } as typeof base;
}

describe("combination gating", () => {
  it("spei offers only monthly, so spei+annual is impossible at the control level", () => {
    const options = frequencyOptions(CATALOG, "csic", "spei");
    expect(options).toEqual(["monthly"]);
    expect(options).not.toContain("annual");
  });

  it("spei+annual fails validation if forced into the state", () => {
    const f = form({ source: "csic", variable: "spei", frequency: "annual", yearFrom: 2001, yearTo: 2001 });
    const violations = validateForm(CATALOG, f);
    expect(violations.some((v) => v.field === "frequency")).toBe(true);
    expect(canSubmit(CATALOG, f)).toBe(false);
  });

  it("daily output exists only for the daily-native source", () => {
    expect(frequencyOptions(CATALOG, "era5", "temperature_avg")).toContain("daily");
    expect(frequencyOptions(CATALOG, "cru_ts", "temperature_avg")).not.toContain("daily");
  });

  it("threshold narrows frequencies to threshold periods", () => {
    expect(frequencyOptions(CATALOG, "era5", "temperature_avg", true)).toEqual([
      "monthly",
      "annual",
    ]);
  });

  it("thresholds unavailable on monthly sources", () => {
    expect(thresholdAvailable(CATALOG, "era5")).toBe(true);
    expect(thresholdAvailable(CATALOG, "cru_ts")).toBe(false);
    expect(frequencyOptions(CATALOG, "cru_ts", "temperature_avg", true)).toEqual([]);
  });

  it("base years come from the catalog per weighting kind", () => {
    expect(baseYearOptions(CATALOG, "population")).toEqual([2000, 2005]);
    expect(baseYearOptions(CATALOG, "nightlight")).toEqual([2015]);
    expect(baseYearOptions(CATALOG, "unweighted")).toEqual([]);
    expect(baseYearOptions(CATALOG, "concurrent")).toEqual([]);
  });

  it("fixed-base weighting without base year cannot submit", () => {
    const f = form({ weightKind: "population", baseYear: null });
    expect(canSubmit(CATALOG, f)).toBe(false);
    expect(canSubmit(CATALOG, form({ weightKind: "population", baseYear: 2000 }))).toBe(true);
  });

  it("year range outside coverage cannot submit", () => {
    expect(canSubmit(CATALOG, form({ yearFrom: 1990 }))).toBe(false);
    expect(canSubmit(CATALOG, form({ yearFrom: 2001, yearTo: 2000 }))).toBe(false);
  });

  it("unknown variable for source is rejected", () => {
    expect(variableOptions(CATALOG, "csic")).toEqual(["spei"]);
    expect(canSubmit(CATALOG, form({ source: "csic", variable: "wind_gust" }))).toBe(false);
  });
});

describe("canonical query body", () => {
  it("normalizes casing and is deterministic", () => {
    const f = form({ source: "ERA5" });
    const a = JSON.stringify(toQueryBody(f));
    const b = JSON.stringify(toQueryBody(form({ source: "era5" })));
    expect(a).toBe(b);
  });

  it("includes threshold only when enabled, with period tied to frequency", () => {
    const without = toQueryBody(form());
    expect(without).not.toHaveProperty("threshold");
    const withT = toQueryBody(
      form({
        frequency: "annual",
        threshold: {
          enabled: true, mode: "relative", direction: "above",
          value: 95, baselineFrom: null, baselineTo: null,
        },
      }),
    );
    expect(withT.threshold).toMatchObject({ mode: "relative", value: 95, period: "annual" });
  });

  it("default form is submittable against its own catalog", () => {
    expect(canSubmit(CATALOG, defaultForm(CATALOG))).toBe(true);
  });
});
