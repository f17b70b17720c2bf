// View state and its URL (de)serialization so any view is shareable.

export const FAIRNESS_METRICS = ["dp", "eo", "eopp", "pp"] as const;
export const PERFORMANCE_METRICS = ["f1", "accuracy", "precision", "recall", "auroc"] as const;
export const FAMILIES = ["no-mitigation", "pre", "in", "post", "causal"] as const;

export interface ViewState {
  experiment: string;
  phi: string;
  pi: string;
  mode: "tradeoff" | "constrained";
  beta: string; // kept as strings: slider values go to the query verbatim
  Phi: string;
  families: string[]; // client-side display filter only
  highlight: string | null;
}

export function defaultState(experiment = ""): ViewState {
  return {
    experiment,
    phi: "dp",
    pi: "f1",
    mode: "tradeoff",
    beta: "1.0",
    Phi: "0.05",
    families: [...FAMILIES],
    highlight: null,
  };
}

export function toQuery(state: ViewState): string {
  const q = new URLSearchParams({
    phi: state.phi,
    pi: state.pi,
    beta: state.beta,
    Phi: state.Phi,
    mode: state.mode,
  });
  return q.toString();
}

export function toURL(state: ViewState): string {
  const q = new URLSearchParams({
    experiment: state.experiment,
    phi: state.phi,
    pi: state.pi,
    beta: state.beta,
    Phi: state.Phi,
    mode: state.mode,
    families: state.families.join(","),
  });
  if (state.highlight) q.set("highlight", state.highlight);
  return "#" + q.toString();
}

export function fromURL(hash: string, fallback: ViewState): ViewState {
  const q = new URLSearchParams(hash.replace(/^#/, ""));
  const mode = q.get("mode");
  return {
    experiment: q.get("experiment") ?? fallback.experiment,
    phi: q.get("phi") ?? fallback.phi,
    pi: q.get("pi") ?? fallback.pi,
    mode: mode === "constrained" || mode === "tradeoff" ? mode : fallback.mode,
    beta: q.get("beta") ?? fallback.beta,
    Phi: q.get("Phi") ?? fallback.Phi,
    families: q.get("families") ? q.get("families")!.split(",") : [...fallback.families],
    highlight: q.get("highlight"),
  };
}
