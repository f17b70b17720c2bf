// Wiring: ViewState drives exactly one comparison query per change; stale
// responses are discarded by token; the view renders purely from
// (state, last good response). Service errors keep the last good view and
// show a retryable banner.

import { Api } from "./api.js";
import { renderControls } from "./controls.js";
import { renderPlane } from "./plane.js";
import { defaultState, fromURL, toQuery, toURL, type ViewState } from "./state.js";
import { renderTable } from "./table.js";
import type { ComparisonResponse, ExperimentSummary } from "./types.js";

export interface AppHooks {
  onRendered?: () => void;
  replaceUrl?: (hash: string) => void;
}

export class App {
  state: ViewState = defaultState();
  experiments: ExperimentSummary[] = [];
  lastResponse: ComparisonResponse | null = null;
  lastError: string | null = null;
  requestCount = 0;
  private token = 0;

  private controlsEl: HTMLElement;
  private planeEl: HTMLElement;
  private tableEl: HTMLElement;
  private errorEl: HTMLElement;

  constructor(
    private root: HTMLElement,
    private api: Api,
    private hooks: AppHooks = {},
  ) {
    this.root.innerHTML =
      `<div class="layout">` +
      `<aside class="panel" data-role="controls"></aside>` +
      `<main><div data-role="error"></div>` +
      `<section data-role="plane"></section>` +
      `<section data-role="table"></section></main></div>`;
    this.controlsEl = root.querySelector<HTMLElement>('[data-role="controls"]')!;
    this.planeEl = root.querySelector<HTMLElement>('[data-role="plane"]')!;
    this.tableEl = root.querySelector<HTMLElement>('[data-role="table"]')!;
    this.errorEl = root.querySelector<HTMLElement>('[data-role="error"]')!;
  }

  async start(urlHash = ""): Promise<void> {
    this.experiments = await this.api.listExperiments();
    const first = this.experiments[0];
    this.state = fromURL(urlHash, defaultState(first ? first.id : ""));
    if (!this.state.experiment && first) this.state.experiment = first.id;
    await this.refresh();
  }

  async setState(next: ViewState): Promise<void> {
    const queryChanged =
      toQuery(next) !== toQuery(this.state) || next.experiment !== this.state.experiment;
    this.state = next;
    if (queryChanged) {
      await this.refresh();
    } else {
      this.render();
    }
  }

  /** Issue exactly one comparison request for the current state. */
  async refresh(): Promise<void> {
    const token = ++this.token;
    this.requestCount += 1;
    try {
      const response = await this.api.comparison(this.state.experiment, toQuery(this.state));
      if (token !== this.token) return; // stale response discarded
      this.lastResponse = response;
      this.lastError = null;
    } catch (err) {
      if (token !== this.token) return;
      this.lastError = err instanceof Error ? err.message : String(err);
    }
    this.render();
  }

  render(): void {
    renderControls(this.controlsEl, this.experiments, this.state, (next) => {
      void this.setState(next);
    });
    this.errorEl.replaceChildren();
    if (this.lastError) {
      const banner = document.createElement("div");
      banner.className = "error-banner";
      const msg = document.createElement("span");
      msg.textContent = `service error: ${this.lastError} (showing last good view)`;
      const retry = document.createElement("button");
      retry.textContent = "retry";
      retry.dataset.role = "retry";
      retry.addEventListener("click", () => void this.refresh());
      banner.append(msg, retry);
      this.errorEl.append(banner);
    }
    const select = (id: string) => {
      this.state = { ...this.state, highlight: id };
      this.render();
    };
    renderPlane(this.planeEl, this.lastResponse, this.state.families, this.state.highlight, select);
    renderTable(this.tableEl, this.lastResponse, this.state.families, this.state.highlight, select);
    this.hooks.replaceUrl?.(toURL(this.state));
    this.hooks.onRendered?.();
  }
}
