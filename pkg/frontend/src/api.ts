import type { PairView, ResultsView } from "./state.js";

export class ApiError extends Error {
  status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

async function getJson<T>(url: string): Promise<T> {
  const resp = await fetch(url);
  if (!resp.ok) {
    throw new ApiError(resp.status, `GET ${url} failed with ${resp.status}`);
  }
  return (await resp.json()) as T;
}

/** Thin typed wrapper over the study service endpoints. `base` is empty in
 * the browser (same origin) and an absolute http://host:port in tests. */
export class StudyApi {
  base: string;

  constructor(base = "") {
    this.base = base;
  }

  nextPair(rater: string): Promise<PairView> {
    const q = encodeURIComponent(rater);
    return getJson<PairView>(`${this.base}/api/next-pair?rater=${q}`);
  }

  async submitRatings(token: string, ratings: Record<string, number>): Promise<void> {
    const resp = await fetch(`${this.base}/api/ratings`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ token, ratings }),
    });
    if (!resp.ok) {
      throw new ApiError(resp.status, `rating submission failed with ${resp.status}`);
    }
  }

  results(criterion: string): Promise<ResultsView> {
    const q = encodeURIComponent(criterion);
    return getJson<ResultsView>(`${this.base}/api/results?criterion=${q}`);
  }
}
