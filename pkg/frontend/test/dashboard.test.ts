import { afterEach, expect, test, vi } from "vitest";

import { StudyApi } from "../src/api.js";
import { createApp } from "../src/app.js";
import type { ResultsView } from "../src/state.js";

function resultsPayload(aPref: number, bPref: number, noPref: number): ResultsView {
  return {
    criterion: "general",
    n_records: 10,
    win_rates: [
      { model_a: "m1", model_b: "m2", n: 10, a_pref: aPref, b_pref: bPref, no_pref: noPref },
    ],
    elo: [
      { model: "m1", elo: 1500.0, wins: 0, ties: 10, losses: 0 },
      { model: "m2", elo: 1500.0, wins: 0, ties: 10, losses: 0 },
    ],
  };
}

function appWithResults(payload: ResultsView | Error) {
  document.body.innerHTML = '<main id="app"></main>';
  vi.stubGlobal("fetch", vi.fn(async () => {
    if (payload instanceof Error) throw payload;
    return new Response(JSON.stringify(payload), {
      status: 200,
      headers: { "content-type": "application/json" },
    });
  }));
  return createApp(document.getElementById("app")!, { api: new StudyApi("") });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

test("all-tie results render a full no-preference bar and anchored elo", async () => {
  const app = appWithResults(resultsPayload(0, 0, 1));
  await app.showDashboard();

  const none = app.root.querySelector<HTMLElement>(".seg-none")!;
  expect(parseFloat(none.style.width)).toBe(100);
  expect(parseFloat(app.root.querySelector<HTMLElement>(".seg-a")!.style.width)).toBe(0);
  expect(app.root.querySelector("[data-mean-elo]")!.textContent).toBe("1500.0");
  app.dispose();
});

test("one-sided results render a full bar on one side", async () => {
  const app = appWithResults(resultsPayload(1, 0, 0));
  await app.showDashboard();

  expect(parseFloat(app.root.querySelector<HTMLElement>(".seg-a")!.style.width)).toBe(100);
  expect(parseFloat(app.root.querySelector<HTMLElement>(".seg-b")!.style.width)).toBe(0);
  app.dispose();
});

test("unreachable results endpoint raises the stale banner", async () => {
  const app = appWithResults(new TypeError("down"));
  await app.showDashboard();

  expect(app.root.textContent).toContain("Service unreachable");
  app.dispose();
});

test("criterion dropdown refetches on change", async () => {
  const app = appWithResults(resultsPayload(0.2, 0.3, 0.5));
  await app.showDashboard();

  const select = app.root.querySelector<HTMLSelectElement>("[data-action=pick-criterion]")!;
  select.value = "motion";
  select.dispatchEvent(new Event("change", { bubbles: true }));
  await new Promise((resolve) => setTimeout(resolve, 20));

  expect(app.state.resultsCriterion).toBe("motion");
  const calls = (globalThis.fetch as ReturnType<typeof vi.fn>).mock.calls;
  expect(String(calls[calls.length - 1][0])).toContain("criterion=motion");
  app.dispose();
});
