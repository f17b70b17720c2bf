import type { ComparisonResponse, ExperimentSummary } from "./types.js";

export type Fetcher = (url: string) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function getJson<T>(fetcher: Fetcher, url: string): Promise<T> {
  const res = await fetcher(url);
  if (!res.ok) {
    throw new ApiError(res.status, `${url} failed with ${res.status}`);
  }
  return (await res.json()) as T;
}

export class Api {
  constructor(private fetcher: Fetcher, private base = "") {}

  listExperiments(): Promise<ExperimentSummary[]> {
    return getJson(this.fetcher, `${this.base}/experiments`);
  }

  comparison(experiment: string, query: string): Promise<ComparisonResponse> {
    return getJson(
      this.fetcher,
      `${this.base}/experiments/${encodeURIComponent(experiment)}/comparison?${query}`,
    );
  }
}
