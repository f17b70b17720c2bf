// Fairness-performance plane: x = |fairness metric|, y = performance metric.
// Mitigated and unmitigated entries are styled differently; constrained mode
// draws the Phi bound as a vertical line; the winner is highlighted. Pixel
// placement scales the server-provided coordinates for layout only; the
// numbers shown in labels/tooltips are the wire values verbatim.

import { display } from "./format.js";
import type { ComparisonResponse, PlaneEntry } from "./types.js";

const W = 640;
const H = 420;
const PAD = 48;

const SVG_NS = "http://www.w3.org/2000/svg";

function svgEl(tag: string, attrs: Record<string, string>): SVGElement {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, v);
  return el;
}

function xPixel(phiAbs: number, maxPhi: number): number {
  return PAD + (W - 2 * PAD) * (maxPhi > 0 ? phiAbs / maxPhi : 0);
}

function yPixel(pi: number): number {
  return H - PAD - (H - 2 * PAD) * pi;
}

export function renderPlane(
  root: HTMLElement,
  response: ComparisonResponse | null,
  visibleFamilies: string[],
  highlight: string | null,
  onSelect: (id: string) => void,
): void {
  root.replaceChildren();
  if (!response || response.entries.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No entries to plot for this experiment.";
    root.append(empty);
    return;
  }
  const entries = response.entries;
  const shown = entries.filter((e) => visibleFamilies.includes(e.family));
  const maxPhi = Math.max(0.01, ...entries.map((e) => e.phi_abs));

  const svg = svgEl("svg", {
    viewBox: `0 0 ${W} ${H}`,
    class: "plane",
    role: "img",
  }) as SVGSVGElement;

  svg.append(
    svgEl("line", {
      x1: String(PAD), y1: String(H - PAD), x2: String(W - PAD), y2: String(H - PAD),
      class: "axis",
    }),
    svgEl("line", {
      x1: String(PAD), y1: String(PAD), x2: String(PAD), y2: String(H - PAD),
      class: "axis",
    }),
  );
  const xLabel = svgEl("text", { x: String(W / 2), y: String(H - 10), class: "axis-label" });
  xLabel.textContent = `|${response.selector.phi}| (lower is fairer)`;
  const yLabel = svgEl("text", {
    x: "14", y: String(H / 2), class: "axis-label",
    transform: `rotate(-90 14 ${H / 2})`,
  });
  yLabel.textContent = response.selector.pi;
  svg.append(xLabel, yLabel);

  if (response.selector.mode === "constrained") {
    const bx = xPixel(response.selector.Phi, maxPhi);
    if (bx <= W - PAD) {
      svg.append(
        svgEl("line", {
          x1: String(bx), y1: String(PAD), x2: String(bx), y2: String(H - PAD),
          class: "phi-bound",
        }),
      );
      const lbl = svgEl("text", { x: String(bx + 4), y: String(PAD + 12), class: "phi-label" });
      lbl.textContent = `Φ = ${display(response.selector.Phi)}`;
      svg.append(lbl);
    }
  }

  for (const e of shown) {
    if (e.pi === null) continue;
    const g = svgEl("g", { class: pointClass(e, response, highlight), "data-id": e.strategy_id });
    const dot = svgEl("circle", {
      cx: String(xPixel(e.phi_abs, maxPhi)),
      cy: String(yPixel(e.pi)),
      r: e.strategy_id === response.winner ? "9" : "6",
    });
    const title = svgEl("title", {});
    title.textContent =
      `${e.strategy_id} (${e.family}): |${response.selector.phi}| = ${display(e.phi_abs)}, ` +
      `${response.selector.pi} = ${display(e.pi)}`;
    dot.append(title);
    g.append(dot);
    g.addEventListener("click", () => onSelect(e.strategy_id));
    svg.append(g);
  }
  root.append(svg);
}

function pointClass(e: PlaneEntry, response: ComparisonResponse, highlight: string | null) {
  const classes = ["point"];
  classes.push(e.family === "no-mitigation" ? "unmitigated" : "mitigated");
  if (e.strategy_id === response.winner) classes.push("winner");
  if (e.strategy_id === highlight) classes.push("highlight");
  return classes.join(" ");
}
