/**
 * Leaderboard rendering.
 *
 * Every figure in the table is the exact byte sequence the API sent:
 * entries are parsed with raw-literal numbers and the cells carry those
 * literals, so a score the service reports as 0.8333333333333334 can never
 * silently become 0.833333333333333 on screen.
 */

import { escapeHtml } from "./html.js";
import {
  JsonValue,
  asArray,
  asObject,
  displayText,
  parseWithRawNumbers,
} from "./rawJson.js";
import { REPORT_METRICS } from "./outcome.js";

export interface LeaderboardEntryView {
  rank: string;
  participantId: string;
  displayName: string;
  team: boolean;
  submissions: string;
  bestSubmittedAt: string;
  /** Metric name -> payload literal for the best submission. */
  bestScores: Record<string, string>;
  lastSubmittedAt: string;
  lastScores: Record<string, string>;
}

function scoreLiterals(scores: JsonValue | undefined): Record<string, string> {
  const doc = asObject(scores, "scores");
  const out: Record<string, string> = {};
  for (const metric of Object.keys(doc)) {
    out[metric] = displayText(doc[metric]);
  }
  return out;
}

/** Parse a leaderboard payload into display-ready entries. */
export function leaderboardEntries(bodyText: string): LeaderboardEntryView[] {
  const doc = asArray(parseWithRawNumbers(bodyText), "leaderboard");
  return doc.map((item, index) => {
    const entry = asObject(item, `entry ${index}`);
    const best = asObject(entry["best"], "best");
    const last = asObject(entry["last"], "last");
    return {
      rank: displayText(entry["rank"]),
      participantId: displayText(entry["participant_id"]),
      displayName: displayText(entry["display_name"]),
      team: entry["team"] === true,
      submissions: displayText(entry["submissions"]),
      bestSubmittedAt: displayText(best["submitted_at"]),
      bestScores: scoreLiterals(best["scores"]),
      lastSubmittedAt: displayText(last["submitted_at"]),
      lastScores: scoreLiterals(last["scores"]),
    };
  });
}

/** Render the leaderboard payload as an HTML table. */
export function renderLeaderboard(bodyText: string): string {
  const entries = leaderboardEntries(bodyText);
  if (entries.length === 0) {
    return `<p class="empty">No submissions yet.</p>`;
  }
  const metricHeads = REPORT_METRICS.map(
    (metric) => `<th scope="col" class="metric">${escapeHtml(metric)}</th>`,
  ).join("");
  const rows = entries
    .map((entry) => {
      const cells = REPORT_METRICS.map(
        (metric) =>
          `<td class="metric">${escapeHtml(entry.bestScores[metric] ?? "—")}</td>`,
      ).join("");
      const name =
        escapeHtml(entry.displayName) +
        (entry.team ? ` <span class="badge">team</span>` : "");
      return (
        `<tr>` +
        `<td class="rank">${escapeHtml(entry.rank)}</td>` +
        `<td class="name">${name}</td>` +
        `<td class="count">${escapeHtml(entry.submissions)}</td>` +
        cells +
        `<td class="when">${escapeHtml(entry.bestSubmittedAt)}</td>` +
        `</tr>`
      );
    })
    .join("");
  return (
    `<table class="leaderboard"><thead><tr>` +
    `<th scope="col">#</th><th scope="col">Participant</th>` +
    `<th scope="col">Subs</th>${metricHeads}<th scope="col">Best at</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}
