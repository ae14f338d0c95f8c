// Browser wiring: builds the query form from the catalog, keeps controls
// limited to valid combinations, and renders the preview panels.

import { ApiClient, ApiServiceError } from "./api.js";
import { renderSeriesChart } from "./chart.js";
import { renderChoropleth } from "./choropleth.js";
import { buildFilename, triggerDownload } from "./download.js";
import {
  baseYearOptions,
  canSubmit,
  defaultForm,
  frequencyOptions,
  sourceOptions,
  thresholdAvailable,
  validateForm,
  variableOptions,
  weightOptions,
  yearBounds,
} from "./formState.js";
import { DashboardStore } from "./store.js";
import type { AggregateResponse, Catalog, QueryFormState, ThresholdMode } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

function fillSelect(select: HTMLSelectElement, options: (string | number)[], current: string | number | null) {
  select.innerHTML = "";
  for (const option of options) {
    const o = el("option", { value: String(option) }, String(option));
    if (String(option) === String(current)) o.selected = true;
    select.appendChild(o);
  }
  select.disabled = options.length === 0;
}

export class DashboardApp {
  private form: QueryFormState;
  private store: DashboardStore;
  private response: AggregateResponse | null = null;
  private controls: Record<string, HTMLSelectElement | HTMLInputElement> = {};

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly catalog: Catalog,
  ) {
    this.form = defaultForm(catalog);
    this.store = new DashboardStore(api, catalog);
  }

  static async boot(root: HTMLElement, baseUrl: string): Promise<DashboardApp> {
    const api = new ApiClient(baseUrl);
    const catalog = await api.catalog();
    const app = new DashboardApp(root, api, catalog);
    app.buildLayout();
    app.refreshControls();
    return app;
  }

  private buildLayout() {
    this.root.innerHTML = "";
    const formBox = el("div", { class: "form" });
    const addSelect = (name: string, label: string) => {
      const wrap = el("label", { class: `field field-${name}` }, label + " ");
      const select = el("select", { name });
      select.addEventListener("change", () => this.onControlChange(name, select.value));
      wrap.appendChild(select);
      formBox.appendChild(wrap);
      this.controls[name] = select;
    };
    const addNumber = (name: string, label: string) => {
      const wrap = el("label", { class: `field field-${name}` }, label + " ");
      const input = el("input", { name, type: "number" });
      input.addEventListener("change", () => this.onControlChange(name, input.value));
      wrap.appendChild(input);
      formBox.appendChild(wrap);
      this.controls[name] = input;
    };
    addSelect("source", "Source");
    addSelect("variable", "Variable");
    addSelect("level", "Level");
    addSelect("weight", "Weighting");
    addSelect("base_year", "Base year");
    addSelect("frequency", "Frequency");
    addNumber("year_from", "From");
    addNumber("year_to", "To");

    // threshold builder: three mode tabs per the extreme-statistics semantics
    const thresholdBox = el("fieldset", { class: "threshold" });
    thresholdBox.appendChild(el("legend", {}, "Extreme thresholds"));
    const enable = el("input", { type: "checkbox", name: "threshold_enabled" });
    enable.addEventListener("change", () => {
      this.form.threshold.enabled = enable.checked;
      this.refreshControls();
    });
    const enableWrap = el("label", {}, "enabled ");
    enableWrap.appendChild(enable);
    thresholdBox.appendChild(enableWrap);
    const tabs = el("div", { class: "tabs", role: "tablist" });
    for (const mode of ["absolute", "relative", "cumulative"] as ThresholdMode[]) {
      const tab = el("button", { type: "button", role: "tab", "data-mode": mode }, mode);
      tab.addEventListener("click", () => {
        this.form.threshold.mode = mode;
        this.refreshControls();
      });
      tabs.appendChild(tab);
    }
    thresholdBox.appendChild(tabs);
    const direction = el("select", { name: "threshold_direction" });
    fillSelect(direction, ["above", "below"], "above");
    direction.addEventListener("change", () => {
      this.form.threshold.direction = direction.value as "above" | "below";
    });
    thresholdBox.appendChild(direction);
    const value = el("input", { name: "threshold_value", type: "number", step: "any", placeholder: "value / percentile" });
    value.addEventListener("change", () => {
      this.form.threshold.value = Number(value.value);
    });
    thresholdBox.appendChild(value);
    formBox.appendChild(thresholdBox);
    this.controls["threshold_enabled"] = enable;
    this.controls["threshold_value"] = value;

    const submit = el("button", { class: "submit", type: "button" }, "Aggregate");
    submit.addEventListener("click", () => void this.submit());
    formBox.appendChild(submit);

    this.root.appendChild(formBox);
    this.root.appendChild(el("div", { class: "violations" }));
    this.root.appendChild(el("div", { class: "toast", hidden: "hidden" }));
    const panels = el("div", { class: "panels" });
    panels.appendChild(el("div", { class: "map-panel" }));
    panels.appendChild(el("div", { class: "chart-panel" }));
    panels.appendChild(el("div", { class: "download-panel" }));
    this.root.appendChild(panels);
  }

  private onControlChange(name: string, value: string) {
    switch (name) {
      case "source":
        this.form.source = value;
        this.form.variable = variableOptions(this.catalog, value)[0] ?? "";
        break;
      case "variable":
        this.form.variable = value;
        break;
      case "level":
        this.form.level = value;
        break;
      case "weight":
        this.form.weightKind = value;
        this.form.baseYear = baseYearOptions(this.catalog, value)[0] ?? null;
        break;
      case "base_year":
        this.form.baseYear = value ? Number(value) : null;
        break;
      case "frequency":
        this.form.frequency = value;
        break;
      case "year_from":
        this.form.yearFrom = Number(value);
        break;
      case "year_to":
        this.form.yearTo = Number(value);
        break;
    }
    this.refreshControls();
  }

  /** Re-derive every control's options from the catalog so invalid
   * combinations are disabled rather than submittable. */
  refreshControls() {
    const c = this.controls;
    fillSelect(c["source"] as HTMLSelectElement, sourceOptions(this.catalog), this.form.source);
    const variables = variableOptions(this.catalog, this.form.source);
    if (!variables.includes(this.form.variable)) this.form.variable = variables[0] ?? "";
    fillSelect(c["variable"] as HTMLSelectElement, variables, this.form.variable);
    fillSelect(c["level"] as HTMLSelectElement, this.catalog.levels, this.form.level);
    fillSelect(c["weight"] as HTMLSelectElement, weightOptions(this.catalog), this.form.weightKind);
    const years = baseYearOptions(this.catalog, this.form.weightKind);
    if (this.form.baseYear !== null && !years.includes(this.form.baseYear)) {
      this.form.baseYear = years[0] ?? null;
    }
    fillSelect(c["base_year"] as HTMLSelectElement, years, this.form.baseYear);
    const frequencies = frequencyOptions(
      this.catalog, this.form.source, this.form.variable, this.form.threshold.enabled,
    );
    if (!frequencies.includes(this.form.frequency)) this.form.frequency = frequencies[0] ?? "";
    fillSelect(c["frequency"] as HTMLSelectElement, frequencies, this.form.frequency);
    const bounds = yearBounds(this.catalog, this.form.source, this.form.variable);
    if (bounds) {
      const [lo, hi] = bounds;
      if (this.form.yearFrom < lo || this.form.yearFrom > hi) this.form.yearFrom = lo;
      if (this.form.yearTo > hi || this.form.yearTo < lo) this.form.yearTo = hi;
    }
    (c["year_from"] as HTMLInputElement).value = String(this.form.yearFrom);
    (c["year_to"] as HTMLInputElement).value = String(this.form.yearTo);

    const thresholdToggle = c["threshold_enabled"] as HTMLInputElement;
    thresholdToggle.disabled = !thresholdAvailable(this.catalog, this.form.source);
    if (thresholdToggle.disabled) {
      this.form.threshold.enabled = false;
      thresholdToggle.checked = false;
    }
    for (const tab of this.root.querySelectorAll<HTMLButtonElement>(".tabs [role=tab]")) {
      tab.setAttribute("aria-selected", String(tab.dataset["mode"] === this.form.threshold.mode));
      tab.disabled = !this.form.threshold.enabled;
    }

    const violations = validateForm(this.catalog, this.form);
    const box = this.root.querySelector(".violations")!;
    box.textContent = violations.map((v) => v.message).join("; ");
    const submit = this.root.querySelector<HTMLButtonElement>(".submit")!;
    submit.disabled = violations.length > 0 || this.form.pending;
  }

  private toast(message: string) {
    const box = this.root.querySelector<HTMLElement>(".toast")!;
    box.textContent = message;
    box.hidden = false;
    setTimeout(() => {
      box.hidden = true;
    }, 6000);
  }

  async submit(): Promise<void> {
    this.form.pending = true;
    this.refreshControls();
    try {
      const outcome = await this.store.submit(this.form);
      if (outcome.kind === "error") {
        this.toast(outcome.message); // service message shown verbatim
        return;
      }
      if (outcome.kind === "blocked") {
        this.toast(outcome.reasons.join("; "));
        return;
      }
      if (outcome.kind === "stale") return;
      this.response = outcome.response;
      this.form.resultId = outcome.response.id;
      this.form.selectedPeriod = outcome.response.periods[0] ?? null;
      await this.renderResult();
    } finally {
      this.form.pending = false;
      this.refreshControls();
    }
  }

  private async renderResult(): Promise<void> {
    const response = this.response;
    if (!response || !this.form.selectedPeriod) return;
    const geo = await this.store.geoPreview(response.id, this.form.selectedPeriod);
    const mapPanel = this.root.querySelector<HTMLElement>(".map-panel")!;
    mapPanel.innerHTML = renderChoropleth(geo);

    const periodSelect = el("select", { class: "period-select" });
    fillSelect(periodSelect, response.periods, this.form.selectedPeriod);
    periodSelect.addEventListener("change", () => {
      this.form.selectedPeriod = periodSelect.value;
      void this.renderResult();
    });
    mapPanel.prepend(periodSelect);

    const chartPanel = this.root.querySelector<HTMLElement>(".chart-panel")!;
    chartPanel.innerHTML = renderSeriesChart(response.preview, response.periods);

    const downloadPanel = this.root.querySelector<HTMLElement>(".download-panel")!;
    downloadPanel.innerHTML = "";
    for (const layout of this.catalog.layouts) {
      for (const format of this.catalog.formats) {
        const button = el(
          "button",
          { type: "button", class: "download", "data-layout": layout, "data-format": format },
          `${layout} ${format}`,
        );
        button.addEventListener("click", () => {
          void this.download(layout, format);
        });
        downloadPanel.appendChild(button);
      }
    }
  }

  async download(layout: string, format: string): Promise<void> {
    const id = this.form.resultId;
    if (!id) return;
    try {
      // probe so a missing result surfaces as a toast instead of a dead tab
      await this.api.fetchDownload(id, layout, format);
    } catch (err) {
      if (err instanceof ApiServiceError && err.status === 404) {
        this.toast(`result expired: ${err.message}`);
        return;
      }
      this.toast(String(err));
      return;
    }
    triggerDownload(
      document,
      this.api.downloadUrl(id, layout, format),
      buildFilename(this.form, layout, format),
    );
  }
}

export async function main(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("api") ?? "http://127.0.0.1:8000";
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");
  try {
    await DashboardApp.boot(root, base);
  } catch (err) {
    root.textContent = `failed to load catalog from ${base}: ${err}`;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void main();
}
