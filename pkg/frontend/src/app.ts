import { ApiError, StudyApi } from "./api.js";
import type { AppState } from "./state.js";
import { allRated, initialState } from "./state.js";
import { renderApp, SCALE } from "./views.js";

export interface AppOptions {
  api?: StudyApi;
}

export interface AppController {
  state: AppState;
  root: HTMLElement;
  start(rater: string): Promise<void>;
  loadNext(): Promise<void>;
  select(criterionId: string, value: number): void;
  submit(): Promise<void>;
  showDashboard(): Promise<void>;
  backToRating(): Promise<void>;
  dispose(): void;
}

function syncPlayers(root: HTMLElement): void {
  const players = Array.from(root.querySelectorAll<HTMLVideoElement>("video.player"));
  if (players.length < 2) return;
  const mirror = (source: HTMLVideoElement, playing: boolean) => {
    for (const other of players) {
      if (other === source) continue;
      try {
        if (playing) void other.play()?.catch(() => undefined);
        else other.pause();
      } catch {
        // media playback is unavailable in some environments; ratings still work
      }
    }
  };
  for (const p of players) {
    p.addEventListener("play", () => mirror(p, true));
    p.addEventListener("pause", () => mirror(p, false));
    p.addEventListener("click", () => {
      try {
        if (p.paused) void p.play()?.catch(() => undefined);
        else p.pause();
      } catch {
        // ignore
      }
    });
  }
}

export function createApp(root: HTMLElement, opts: AppOptions = {}): AppController {
  const api = opts.api ?? new StudyApi();
  const state = initialState();
  // tokens already posted once; a second click must never produce a second POST
  const sentTokens = new Set<string>();

  function render(): void {
    root.innerHTML = renderApp(state);
    if (state.screen === "rating") syncPlayers(root);
  }

  // selection changes update the existing markup so the videos keep playing
  function applySelections(): void {
    const pair = state.pair;
    if (!pair || pair.complete || !pair.criteria) return;
    pair.criteria.forEach((crit, idx) => {
      const block = root.querySelector(`[data-criterion-block="${crit.id}"]`);
      if (!block) return;
      block.classList.toggle("active", idx === state.activeCriterion);
      const chosen = state.selections[crit.id];
      for (const btn of Array.from(block.querySelectorAll<HTMLButtonElement>(".scale-btn"))) {
        const pressed = chosen !== undefined && Number(btn.dataset.value) === chosen;
        btn.classList.toggle("selected", pressed);
        btn.setAttribute("aria-pressed", String(pressed));
      }
    });
    const submit = root.querySelector<HTMLButtonElement>("[data-action=submit]");
    if (submit) submit.disabled = !allRated(state) || state.submitting;
  }

  async function loadNext(): Promise<void> {
    state.submitting = false;
    try {
      const pair = await api.nextPair(state.rater);
      state.pair = pair;
      state.selections = {};
      state.activeCriterion = 0;
      state.loadError = "";
      state.screen = pair.complete ? "complete" : "rating";
    } catch (err) {
      state.loadError = err instanceof Error ? err.message : String(err);
      state.screen = "load-error";
    }
    render();
    state.notice = "";
  }

  async function start(rater: string): Promise<void> {
    const trimmed = rater.trim();
    if (!trimmed) {
      state.notice = "Enter a rater id first.";
      render();
      return;
    }
    state.rater = trimmed;
    await loadNext();
  }

  function select(criterionId: string, value: number): void {
    const pair = state.pair;
    if (state.screen !== "rating" || !pair || pair.complete || !pair.criteria) return;
    if (!pair.criteria.some((c) => c.id === criterionId)) return;
    state.selections[criterionId] = value;
    const unanswered = pair.criteria.findIndex((c) => state.selections[c.id] === undefined);
    if (unanswered >= 0) state.activeCriterion = unanswered;
    applySelections();
  }

  async function submit(): Promise<void> {
    const pair = state.pair;
    if (state.screen !== "rating" || !pair || pair.complete || !pair.token) return;
    if (!allRated(state) || state.submitting) return;
    if (sentTokens.has(pair.token)) return;
    sentTokens.add(pair.token);
    state.submitting = true;
    applySelections();
    try {
      await api.submitRatings(pair.token, { ...state.selections });
      await loadNext();
    } catch (err) {
      if (err instanceof ApiError && (err.status === 409 || err.status === 404)) {
        state.notice = "These ratings were already recorded; loading the next pair.";
        await loadNext();
        return;
      }
      // network failure: keep the selections and let the rater try again
      sentTokens.delete(pair.token);
      state.submitting = false;
      state.notice = "Could not reach the study service; your ratings are kept, try again.";
      render();
    }
  }

  async function refreshResults(): Promise<void> {
    try {
      state.results = await api.results(state.resultsCriterion);
      state.resultsStale = false;
    } catch {
      state.resultsStale = true;
    }
    render();
  }

  async function showDashboard(): Promise<void> {
    state.screen = "dashboard";
    await refreshResults();
  }

  async function backToRating(): Promise<void> {
    if (state.pair && !state.pair.complete) {
      state.screen = "rating";
      render();
      applySelections();
      return;
    }
    if (state.pair?.complete) {
      state.screen = "complete";
      render();
      return;
    }
    await loadNext();
  }

  function onClick(event: Event): void {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (!target || !root.contains(target)) return;
    switch (target.dataset.action) {
      case "start": {
        const input = root.querySelector<HTMLInputElement>("#rater");
        void start(input?.value ?? "");
        break;
      }
      case "rate":
        select(target.dataset.criterion ?? "", Number(target.dataset.value));
        break;
      case "submit":
        void submit();
        break;
      case "retry-load":
        void loadNext();
        break;
      case "show-dashboard":
        void showDashboard();
        break;
      case "refresh-results":
        void refreshResults();
        break;
      case "back-to-rating":
        void backToRating();
        break;
    }
  }

  function onChange(event: Event): void {
    const target = event.target as HTMLElement;
    if (target.matches("[data-action=pick-criterion]")) {
      state.resultsCriterion = (target as HTMLSelectElement).value;
      void refreshResults();
    }
  }

  function onKeydown(event: KeyboardEvent): void {
    if (!root.isConnected || state.screen !== "rating") return;
    const pair = state.pair;
    if (!pair || pair.complete || !pair.criteria) return;
    if (event.key >= "1" && event.key <= "5") {
      const active = pair.criteria[state.activeCriterion];
      if (active) select(active.id, SCALE[Number(event.key) - 1].value);
      event.preventDefault();
    } else if (event.key === "Enter") {
      void submit();
      event.preventDefault();
    }
  }

  root.addEventListener("click", onClick);
  root.addEventListener("change", onChange);
  document.addEventListener("keydown", onKeydown);
  render();

  return {
    state,
    root,
    start,
    loadNext,
    select,
    submit,
    showDashboard,
    backToRating,
    dispose: () => {
      root.removeEventListener("click", onClick);
      root.removeEventListener("change", onChange);
      document.removeEventListener("keydown", onKeydown);
    },
  };
}
