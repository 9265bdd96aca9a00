import { escapeHtml } from "./html.js";
import type { AppState, CriterionInfo, ResultsView } from "./state.js";
import { allRated } from "./state.js";

export const SCALE = [
  { value: -2, label: "Strong Preference (Left)" },
  { value: -1, label: "Preference (Left)" },
  { value: 0, label: "No Preference" },
  { value: 1, label: "Preference (Right)" },
  { value: 2, label: "Strong Preference (Right)" },
];

function scaleRow(criterion: CriterionInfo, selected: number | undefined): string {
  const buttons = SCALE.map((s) => {
    const pressed = selected === s.value;
    return `
      <button type="button" class="scale-btn${pressed ? " selected" : ""}"
              data-action="rate" data-criterion="${escapeHtml(criterion.id)}"
              data-value="${s.value}" aria-pressed="${pressed}">
        ${escapeHtml(s.label)}
      </button>`;
  }).join("");
  return `<div class="scale-row" role="group">${buttons}</div>`;
}

function criterionBlock(criterion: CriterionInfo, selected: number | undefined,
                        active: boolean): string {
  return `
    <fieldset class="criterion${active ? " active" : ""}"
              data-criterion-block="${escapeHtml(criterion.id)}">
      <legend>${escapeHtml(criterion.title)}</legend>
      <p class="prompt">${escapeHtml(criterion.prompt)}</p>
      ${scaleRow(criterion, selected)}
    </fieldset>`;
}

function noticeBanner(state: AppState): string {
  if (!state.notice) return "";
  return `<div class="notice" role="status">${escapeHtml(state.notice)}</div>`;
}

export function renderEntry(state: AppState): string {
  return `
    <section class="entry">
      <h1>Video Preference Study</h1>
      <p>You will watch pairs of anonymized driving videos side by side and
         rate which one you prefer on three criteria.</p>
      <label>Rater id
        <input id="rater" type="text" value="${escapeHtml(state.rater)}"
               placeholder="your id" autocomplete="off">
      </label>
      <button type="button" data-action="start">Start rating</button>
      ${noticeBanner(state)}
    </section>`;
}

export function renderRating(state: AppState): string {
  const pair = state.pair;
  if (!pair || pair.complete || !pair.criteria) return "";
  const blocks = pair.criteria
    .map((c, i) => criterionBlock(c, state.selections[c.id], i === state.activeCriterion))
    .join("");
  const ready = allRated(state) && !state.submitting;
  return `
    <section class="rating">
      <header class="toolbar">
        <span class="progress">Completed ${pair.progress.done} of ${pair.progress.total}</span>
        <button type="button" data-action="show-dashboard">Results</button>
      </header>
      ${noticeBanner(state)}
      <div class="players">
        <figure>
          <video class="player" data-side="left" src="${escapeHtml(pair.left_video ?? "")}"
                 autoplay loop muted playsinline></video>
          <figcaption>Left</figcaption>
        </figure>
        <figure>
          <video class="player" data-side="right" src="${escapeHtml(pair.right_video ?? "")}"
                 autoplay loop muted playsinline></video>
          <figcaption>Right</figcaption>
        </figure>
      </div>
      <form class="criteria" onsubmit="return false">
        ${blocks}
        <button type="button" class="submit" data-action="submit"
                ${ready ? "" : "disabled"}>Submit ratings</button>
        <p class="hint">Keys 1-5 rate the highlighted criterion; Enter submits.</p>
      </form>
    </section>`;
}

export function renderComplete(state: AppState): string {
  const total = state.pair?.progress.total ?? 0;
  return `
    <section class="complete">
      <h1>All done, thank you!</h1>
      <p>You rated every available pair (${total} total).</p>
      <button type="button" data-action="show-dashboard">View results</button>
    </section>`;
}

export function renderLoadError(state: AppState): string {
  return `
    <section class="load-error">
      <div class="notice error" role="alert">
        Could not reach the study service: ${escapeHtml(state.loadError)}
      </div>
      <button type="button" data-action="retry-load">Retry</button>
    </section>`;
}

function winRateBars(results: ResultsView): string {
  if (results.win_rates.length === 0) {
    return `<p class="empty">No pairs configured.</p>`;
  }
  return results.win_rates
    .map((p) => {
      const a = (100 * p.a_pref).toFixed(1);
      const none = (100 * p.no_pref).toFixed(1);
      const b = (100 * p.b_pref).toFixed(1);
      return `
        <div class="pair-row">
          <span class="pair-label">${escapeHtml(p.model_a)} vs ${escapeHtml(p.model_b)}
            <small>(${p.n} ratings)</small></span>
          <div class="bar">
            <span class="seg seg-a" style="width:${a}%" title="${escapeHtml(p.model_a)} preferred ${a}%"></span>
            <span class="seg seg-none" style="width:${none}%" title="no preference ${none}%"></span>
            <span class="seg seg-b" style="width:${b}%" title="${escapeHtml(p.model_b)} preferred ${b}%"></span>
          </div>
        </div>`;
    })
    .join("");
}

function eloTable(results: ResultsView): string {
  const rows = results.elo
    .slice()
    .sort((x, y) => y.elo - x.elo)
    .map((m) => `
      <tr>
        <td>${escapeHtml(m.model)}</td>
        <td class="num">${m.elo.toFixed(1)}</td>
        <td class="num">${m.wins}</td>
        <td class="num">${m.ties}</td>
        <td class="num">${m.losses}</td>
      </tr>`)
    .join("");
  const mean = results.elo.length
    ? results.elo.reduce((acc, m) => acc + m.elo, 0) / results.elo.length
    : 0;
  return `
    <table class="elo">
      <thead><tr><th>Model</th><th>Elo</th><th>W</th><th>T</th><th>L</th></tr></thead>
      <tbody>${rows}</tbody>
      <tfoot><tr><td>mean</td><td class="num" data-mean-elo>${mean.toFixed(1)}</td>
        <td colspan="3"></td></tr></tfoot>
    </table>`;
}

export function renderDashboard(state: AppState): string {
  const criteria = ["general", "motion", "visual"];
  const options = criteria
    .map((c) => `<option value="${c}"${c === state.resultsCriterion ? " selected" : ""}>${c}</option>`)
    .join("");
  const stale = state.resultsStale
    ? `<div class="notice error" role="alert">Service unreachable; showing last loaded data.</div>`
    : "";
  const body = state.results
    ? `
      <p class="records-count">${state.results.n_records} ratings for
         <strong>${escapeHtml(state.results.criterion)}</strong></p>
      <h2>Preference rates</h2>
      ${winRateBars(state.results)}
      <h2>Elo</h2>
      ${eloTable(state.results)}`
    : `<p class="empty">No results loaded yet.</p>`;
  return `
    <section class="dashboard">
      <header class="toolbar">
        <label>Criterion
          <select data-action="pick-criterion">${options}</select>
        </label>
        <button type="button" data-action="refresh-results">Refresh</button>
        <button type="button" data-action="back-to-rating">Back to rating</button>
      </header>
      ${stale}
      ${body}
    </section>`;
}

export function renderApp(state: AppState): string {
  switch (state.screen) {
    case "entry":
      return renderEntry(state);
    case "rating":
      return renderRating(state);
    case "complete":
      return renderComplete(state);
    case "load-error":
      return renderLoadError(state);
    case "dashboard":
      return renderDashboard(state);
  }
}
