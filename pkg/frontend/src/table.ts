// Ranked results table. Rows follow the service's ranking order exactly;
// the family filter hides rows without reordering or recomputing anything.

import { display } from "./format.js";
import type { ComparisonResponse } from "./types.js";

export function renderTable(
  root: HTMLElement,
  response: ComparisonResponse | null,
  visibleFamilies: string[],
  highlight: string | null,
  onSelect: (id: string) => void,
): void {
  root.replaceChildren();
  if (!response) return;

  const banner = document.createElement("div");
  banner.className = "winner-banner";
  if (response.winner) {
    banner.innerHTML =
      `winner: <strong data-role="winner">${response.winner}</strong>`;
  } else {
    const hint = response.suggestion
      ? ` nearest to feasible: <strong data-role="suggestion">${response.suggestion}</strong>`
      : "";
    banner.innerHTML =
      `<span class="no-winner" data-role="winner">no strategy satisfies the bound;</span>${hint}`;
  }
  root.append(banner);

  const byId = new Map(response.entries.map((e) => [e.strategy_id, e]));
  const table = document.createElement("table");
  table.className = "ranking";
  const scoreHead = response.selector.mode === "tradeoff" ? "score" : "feasible";
  table.innerHTML =
    `<thead><tr><th>#</th><th>strategy</th><th>family</th>` +
    `<th>|${response.selector.phi}|</th><th>${response.selector.pi}</th>` +
    `<th>${scoreHead}</th></tr></thead>`;
  const body = document.createElement("tbody");

  response.ranking.forEach((id, index) => {
    const e = byId.get(id);
    if (!e || !visibleFamilies.includes(e.family)) return;
    const tr = document.createElement("tr");
    tr.dataset.id = id;
    if (id === response.winner) tr.classList.add("winner");
    if (id === highlight) tr.classList.add("highlight");
    const last =
      response.selector.mode === "tradeoff"
        ? `<td class="metric-value">${display(e.score)}</td>`
        : `<td>${e.feasible ? "yes" : "no"}</td>`;
    tr.innerHTML =
      `<td>${index + 1}</td><td class="strategy">${id}</td><td>${e.family}</td>` +
      `<td class="metric-value">${display(e.phi_abs)}</td>` +
      `<td class="metric-value">${display(e.pi)}</td>` + last;
    tr.addEventListener("click", () => onSelect(id));
    body.append(tr);
  });
  table.append(body);
  root.append(table);
}
