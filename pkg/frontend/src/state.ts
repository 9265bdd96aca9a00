export interface CriterionInfo {
  id: string;
  title: string;
  prompt: string;
}

export interface Progress {
  done: number;
  total: number;
}

export interface PairView {
  complete: boolean;
  token?: string;
  left_video?: string;
  right_video?: string;
  criteria?: CriterionInfo[];
  progress: Progress;
}

export interface PairRate {
  model_a: string;
  model_b: string;
  n: number;
  a_pref: number;
  b_pref: number;
  no_pref: number;
}

export interface ModelRow {
  model: string;
  elo: number;
  wins: number;
  ties: number;
  losses: number;
}

export interface ResultsView {
  criterion: string;
  n_records: number;
  win_rates: PairRate[];
  elo: ModelRow[];
}

export type Screen = "entry" | "rating" | "complete" | "load-error" | "dashboard";

export interface AppState {
  rater: string;
  screen: Screen;
  pair: PairView | null;
  /** criterion id -> chosen scale value, -2..2 */
  selections: Record<string, number>;
  activeCriterion: number;
  submitting: boolean;
  notice: string;
  loadError: string;
  results: ResultsView | null;
  resultsCriterion: string;
  resultsStale: boolean;
}

export function initialState(): AppState {
  return {
    rater: "",
    screen: "entry",
    pair: null,
    selections: {},
    activeCriterion: 0,
    submitting: false,
    notice: "",
    loadError: "",
    results: null,
    resultsCriterion: "general",
    resultsStale: false,
  };
}

export function allRated(state: AppState): boolean {
  const pair = state.pair;
  if (!pair || pair.complete || !pair.criteria) return false;
  return pair.criteria.every((c) => state.selections[c.id] !== undefined);
}
