// Selector panel: experiment, metrics, mode, beta and Phi inputs, family
// filters. Each change produces a new ViewState via the onChange callback;
// the app layer owns querying.

import {
  FAIRNESS_METRICS,
  FAMILIES,
  PERFORMANCE_METRICS,
  type ViewState,
} from "./state.js";
import type { ExperimentSummary } from "./types.js";

function option(value: string, selected: boolean): HTMLOptionElement {
  const el = document.createElement("option");
  el.value = value;
  el.textContent = value;
  el.selected = selected;
  return el;
}

function labeled(text: string, child: HTMLElement): HTMLLabelElement {
  const label = document.createElement("label");
  label.textContent = text;
  label.append(child);
  return label;
}

export function renderControls(
  root: HTMLElement,
  experiments: ExperimentSummary[],
  state: ViewState,
  onChange: (next: ViewState) => void,
): void {
  root.replaceChildren();

  const expSelect = document.createElement("select");
  expSelect.dataset.role = "experiment";
  for (const e of experiments) expSelect.append(option(e.id, e.id === state.experiment));
  expSelect.addEventListener("change", () =>
    onChange({ ...state, experiment: expSelect.value, highlight: null }),
  );
  root.append(labeled("experiment", expSelect));

  const phi = document.createElement("select");
  phi.dataset.role = "phi";
  for (const m of FAIRNESS_METRICS) phi.append(option(m, m === state.phi));
  phi.addEventListener("change", () => onChange({ ...state, phi: phi.value }));
  root.append(labeled("fairness", phi));

  const pi = document.createElement("select");
  pi.dataset.role = "pi";
  for (const m of PERFORMANCE_METRICS) pi.append(option(m, m === state.pi));
  pi.addEventListener("change", () => onChange({ ...state, pi: pi.value }));
  root.append(labeled("performance", pi));

  const mode = document.createElement("select");
  mode.dataset.role = "mode";
  for (const m of ["tradeoff", "constrained"]) mode.append(option(m, m === state.mode));
  mode.addEventListener("change", () =>
    onChange({ ...state, mode: mode.value as ViewState["mode"] }),
  );
  root.append(labeled("mode", mode));

  const beta = document.createElement("input");
  beta.type = "number";
  beta.step = "0.1";
  beta.min = "0.1";
  beta.value = state.beta;
  beta.dataset.role = "beta";
  beta.disabled = state.mode !== "tradeoff";
  beta.addEventListener("change", () => onChange({ ...state, beta: beta.value }));
  root.append(labeled("beta", beta));

  const phiBound = document.createElement("input");
  phiBound.type = "number";
  phiBound.step = "0.01";
  phiBound.min = "0";
  phiBound.value = state.Phi;
  phiBound.dataset.role = "Phi";
  phiBound.disabled = state.mode !== "constrained";
  phiBound.addEventListener("change", () => onChange({ ...state, Phi: phiBound.value }));
  root.append(labeled("Φ bound", phiBound));

  const filters = document.createElement("fieldset");
  filters.className = "families";
  const legend = document.createElement("legend");
  legend.textContent = "families (display filter)";
  filters.append(legend);
  for (const family of FAMILIES) {
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = state.families.includes(family);
    box.dataset.family = family;
    box.addEventListener("change", () => {
      const families = box.checked
        ? [...state.families, family]
        : state.families.filter((f) => f !== family);
      onChange({ ...state, families });
    });
    const label = document.createElement("label");
    label.append(box, document.createTextNode(family));
    filters.append(label);
  }
  root.append(filters);
}
