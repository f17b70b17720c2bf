// Golden tests: the dashboard must reproduce recorded service responses
// verbatim — winner, ranking order, and every displayed number — with zero
// client-side metric computation. Instrumentation: responses are wrapped in
// a number-tracking proxy; every metric string in the DOM must be a value
// the app read from the response object, and every such string must appear
// literally in the recorded JSON.

import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";
import { Api } from "../src/api.js";
import { App } from "../src/app.js";
import { defaultState, fromURL, toURL, type ViewState } from "../src/state.js";
import type { ComparisonResponse, ExperimentSummary } from "../src/types.js";

interface Recorded {
  query: { phi: string; pi: string; mode: string; beta: number; Phi: number };
  response: ComparisonResponse;
}

interface Golden {
  experiments: ExperimentSummary[];
  experiment: unknown;
  comparisons: Recorded[];
}

const golden = JSON.parse(readFileSync("test/golden.json", "utf8")) as Golden;

// ---------------------------------------------------------------------------
// number-tracking proxy + golden fetch stub

function trackNumbers(value: unknown, reads: Set<string>): unknown {
  if (value === null || typeof value !== "object") return value;
  return new Proxy(value as Record<string, unknown>, {
    get(target, prop, receiver) {
      const v = Reflect.get(target, prop, receiver);
      if (typeof v === "number") reads.add(String(v));
      return trackNumbers(v, reads);
    },
  });
}

function jsonNumbers(value: unknown, out = new Set<string>()): Set<string> {
  if (typeof value === "number") out.add(String(value));
  else if (Array.isArray(value)) value.forEach((v) => jsonNumbers(v, out));
  else if (value && typeof value === "object") {
    Object.values(value).forEach((v) => jsonNumbers(v, out));
  }
  return out;
}

function matchRecorded(url: string): Recorded {
  const u = new URL(url, "http://svc");
  const q = u.searchParams;
  const hit = golden.comparisons.find(
    (c) =>
      c.query.phi === q.get("phi") &&
      c.query.pi === q.get("pi") &&
      c.query.mode === q.get("mode") &&
      c.query.beta === Number(q.get("beta")) &&
      c.query.Phi === Number(q.get("Phi")),
  );
  if (!hit) throw new Error(`no golden response recorded for ${url}`);
  return hit;
}

function goldenFetcher(reads: Set<string>, log: string[] = []) {
  return async (url: string): Promise<Response> => {
    log.push(url);
    let body: unknown;
    if (url.endsWith("/experiments")) {
      body = golden.experiments;
    } else if (url.includes("/comparison?")) {
      body = trackNumbers(structuredClone(matchRecorded(url).response), reads);
    } else {
      throw new Error(`unexpected url ${url}`);
    }
    return {
      ok: true,
      status: 200,
      json: async () => body,
    } as Response;
  };
}

function stateFor(query: Recorded["query"]): ViewState {
  return {
    ...defaultState("reference"),
    phi: query.phi,
    pi: query.pi,
    mode: query.mode as ViewState["mode"],
    beta: String(query.beta),
    Phi: String(query.Phi),
  };
}

async function mountWith(query: Recorded["query"]) {
  const reads = new Set<string>();
  const log: string[] = [];
  const root = document.createElement("div");
  document.body.replaceChildren(root);
  const app = new App(root, new Api(goldenFetcher(reads, log)));
  await app.start(toURL(stateFor(query)).replace("#", "#"));
  return { app, root, reads, log };
}

// ---------------------------------------------------------------------------

describe("golden selector configurations", () => {
  for (const recorded of golden.comparisons) {
    const q = recorded.query;
    const label = `${q.mode} phi=${q.phi} pi=${q.pi} beta=${q.beta} Phi=${q.Phi}`;

    it(`winner and ranking match the service verbatim [${label}]`, async () => {
      const { root } = await mountWith(q);
      const resp = recorded.response;

      const winnerEl = root.querySelector('[data-role="winner"]');
      if (resp.winner) {
        expect(winnerEl?.textContent).toBe(resp.winner);
      } else {
        expect(winnerEl?.textContent ?? "").toContain("no strategy");
        const suggestion = root.querySelector('[data-role="suggestion"]');
        expect(suggestion?.textContent).toBe(resp.suggestion);
      }

      const rows = [...root.querySelectorAll("table.ranking tbody tr")];
      expect(rows.map((r) => (r as HTMLElement).dataset.id)).toEqual(resp.ranking);

      const winnerRows = rows.filter((r) => r.classList.contains("winner"));
      if (resp.winner) {
        expect(winnerRows).toHaveLength(1);
        expect((winnerRows[0] as HTMLElement).dataset.id).toBe(resp.winner);
      } else {
        expect(winnerRows).toHaveLength(0);
      }
    });

    it(`every displayed number is a tracked response value [${label}]`, async () => {
      const { root, reads } = await mountWith(q);
      const inJson = jsonNumbers(recorded.response);
      const cells = [...root.querySelectorAll(".metric-value")];
      expect(cells.length).toBeGreaterThan(0);
      for (const cell of cells) {
        const text = cell.textContent ?? "";
        if (text === "--") continue; // null on the wire
        // originated from the response object (proxy saw the read) ...
        expect(reads.has(text), `untracked number ${text}`).toBe(true);
        // ... and is literally present in the recorded JSON
        expect(inJson.has(text), `recomputed number ${text}`).toBe(true);
      }
    });
  }

  it("plane marks the winner and distinguishes unmitigated points", async () => {
    const recoric = golden.comparisons[0]!;
    const { root } = await mountWith(recoric.query);
    const winner = root.querySelectorAll("svg .point.winner");
    expect(winner).toHaveLength(1);
    expect(root.querySelectorAll("svg .point.unmitigated").length).toBe(3);
    expect(
      root.querySelectorAll("svg .phi-bound").length,
      "constrained mode draws the bound line",
    ).toBe(1);
  });
});

describe("selector panel behavior", () => {
  it("each control change issues exactly one comparison query", async () => {
    const first = golden.comparisons[1]!; // tradeoff dp/f1
    const { app, root, log } = await mountWith(first.query);
    const queriesAfterStart = log.filter((u) => u.includes("/comparison")).length;
    expect(queriesAfterStart).toBe(1);

    const modeSelect = root.querySelector<HTMLSelectElement>('[data-role="mode"]')!;
    modeSelect.value = "constrained";
    modeSelect.dispatchEvent(new Event("change"));
    await new Promise((r) => setTimeout(r, 0));
    expect(log.filter((u) => u.includes("/comparison")).length).toBe(2);
    expect(app.requestCount).toBe(2);
  });

  it("family filter hides rows client-side without changing the winner", async () => {
    const recorded = golden.comparisons[0]!;
    const { app, root, log } = await mountWith(recorded.query);
    const before = log.filter((u) => u.includes("/comparison")).length;
    const box = root.querySelector<HTMLInputElement>('input[data-family="post"]')!;
    box.checked = false;
    box.dispatchEvent(new Event("change"));
    await new Promise((r) => setTimeout(r, 0));

    // no new query, winner banner untouched, post rows hidden
    expect(log.filter((u) => u.includes("/comparison")).length).toBe(before);
    expect(root.querySelector('[data-role="winner"]')?.textContent).toBe(
      recorded.response.winner,
    );
    const rows = [...root.querySelectorAll("table.ranking tbody tr")];
    const shown = rows.map((r) => (r as HTMLElement).dataset.id);
    expect(shown).toEqual(
      recorded.response.ranking.filter((id: string) => {
        const e = recorded.response.entries.find((x) => x.strategy_id === id)!;
        return e.family !== "post";
      }),
    );
  });

  it("stale responses are discarded by request token", async () => {
    const slowQ = golden.comparisons[0]!;
    const fastQ = golden.comparisons[2]!;
    const resolvers: Array<() => void> = [];
    const fetcher = async (url: string): Promise<Response> => {
      if (url.endsWith("/experiments")) {
        return { ok: true, status: 200, json: async () => golden.experiments } as Response;
      }
      const recorded = matchRecorded(url);
      await new Promise<void>((resolve) => resolvers.push(resolve));
      return {
        ok: true,
        status: 200,
        json: async () => structuredClone(recorded.response),
      } as Response;
    };
    const root = document.createElement("div");
    document.body.replaceChildren(root);
    const app = new App(root, new Api(fetcher));
    const started = app.start(toURL(stateFor(slowQ.query)));
    await new Promise((r) => setTimeout(r, 0));
    // second query supersedes the first before either resolves
    const second = app.setState(stateFor(fastQ.query));
    await new Promise((r) => setTimeout(r, 0));
    resolvers[1]!();
    await new Promise((r) => setTimeout(r, 0));
    resolvers[0]!(); // stale resolves late
    await Promise.all([started, second]);
    await new Promise((r) => setTimeout(r, 0));
    expect(root.querySelector('[data-role="winner"]')?.textContent).toBe(
      fastQ.response.winner,
    );
  });

  it("service errors keep the last good view and offer retry", async () => {
    const constrained = golden.comparisons[0]!; // constrained dp/f1
    const tradeoff = golden.comparisons[1]!; // tradeoff dp/f1 (same metrics)
    let fail = false;
    const reads = new Set<string>();
    const inner = goldenFetcher(reads);
    const fetcher = async (url: string): Promise<Response> => {
      if (fail && url.includes("/comparison")) {
        return { ok: false, status: 503, json: async () => ({}) } as Response;
      }
      return inner(url);
    };
    const root = document.createElement("div");
    document.body.replaceChildren(root);
    const app = new App(root, new Api(fetcher));
    await app.start(toURL(stateFor(constrained.query)));

    // switch to tradeoff mode while the service is down
    fail = true;
    const modeSelect = root.querySelector<HTMLSelectElement>('[data-role="mode"]')!;
    modeSelect.value = "tradeoff";
    modeSelect.dispatchEvent(new Event("change"));
    await new Promise((r) => setTimeout(r, 0));

    expect(root.querySelector(".error-banner")).not.toBeNull();
    expect(
      root.querySelector('[data-role="winner"]')?.textContent,
      "last good view retained",
    ).toBe(constrained.response.winner);

    // retry re-issues the query for the CURRENT state (tradeoff)
    fail = false;
    const retry = root.querySelector<HTMLButtonElement>('[data-role="retry"]')!;
    retry.click();
    await new Promise((r) => setTimeout(r, 0));
    expect(root.querySelector(".error-banner")).toBeNull();
    expect(root.querySelector('[data-role="winner"]')?.textContent).toBe(
      tradeoff.response.winner,
    );
  });
});

describe("view state", () => {
  it("url round trip preserves every field", () => {
    const state: ViewState = {
      experiment: "reference",
      phi: "eopp",
      pi: "accuracy",
      mode: "constrained",
      beta: "2.5",
      Phi: "0.1",
      families: ["pre", "post"],
      highlight: "massaging",
    };
    expect(fromURL(toURL(state), defaultState("x"))).toEqual(state);
  });

  it("empty-state message renders when there are no entries", async () => {
    const reads = new Set<string>();
    const empty = {
      ...structuredClone(golden.comparisons[0]!.response),
      entries: [],
      ranking: [],
      winner: null,
      feasible: [],
      suggestion: null,
    };
    const fetcher = async (url: string): Promise<Response> => {
      const body = url.endsWith("/experiments")
        ? golden.experiments
        : trackNumbers(empty, reads);
      return { ok: true, status: 200, json: async () => body } as Response;
    };
    const root = document.createElement("div");
    document.body.replaceChildren(root);
    const app = new App(root, new Api(fetcher));
    await app.start("");
    expect(root.querySelector(".empty-state")).not.toBeNull();
  });
});
