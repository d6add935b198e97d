/**
 * A participant's own submission history, rendered from the
 * /submissions/mine payload with the same raw-literal discipline as the
 * leaderboard.
 */

import { escapeHtml } from "./html.js";
import {
  RawNumber,
  asArray,
  asObject,
  displayText,
  parseWithRawNumbers,
} from "./rawJson.js";
import { REPORT_METRICS } from "./outcome.js";

export interface HistoryEntryView {
  submissionId: string;
  receivedAt: string;
  /** Metric name -> payload literal. */
  scores: Record<string, string>;
  /** Numeric weighted-MCC value, for the best/last comparison. */
  wmcc: number | null;
  best: boolean;
}

/** Parse a /submissions/mine payload into display-ready entries. */
export function historyEntries(bodyText: string): HistoryEntryView[] {
  const doc = asArray(parseWithRawNumbers(bodyText), "history");
  return doc.map((item, index) => {
    const entry = asObject(item, `submission ${index}`);
    const scoresDoc = asObject(entry["scores"], "scores");
    const scores: Record<string, string> = {};
    for (const metric of Object.keys(scoresDoc)) {
      scores[metric] = displayText(scoresDoc[metric]);
    }
    const wmcc = scoresDoc["wmcc"];
    return {
      submissionId: displayText(entry["submission_id"]),
      receivedAt: displayText(entry["received_at"]),
      scores,
      wmcc: wmcc instanceof RawNumber ? wmcc.value : null,
      best: entry["best"] === true,
    };
  });
}

/** One-line summary comparing the latest submission with the best one. */
export function historySummary(entries: HistoryEntryView[]): string {
  if (entries.length === 0) {
    return "No submissions yet.";
  }
  const last = entries[entries.length - 1]!;
  const best = entries.find((entry) => entry.best) ?? last;
  if (last.submissionId === best.submissionId) {
    return `Latest submission is your best (wmcc ${last.scores["wmcc"] ?? "—"}).`;
  }
  return (
    `Latest wmcc ${last.scores["wmcc"] ?? "—"}; ` +
    `best so far ${best.scores["wmcc"] ?? "—"} at ${best.receivedAt}.`
  );
}

/** Render the history payload as an HTML table, newest last. */
export function renderHistory(bodyText: string): string {
  const entries = historyEntries(bodyText);
  if (entries.length === 0) {
    return `<p class="empty">No submissions yet.</p>`;
  }
  const metricHeads = REPORT_METRICS.map(
    (metric) => `<th scope="col" class="metric">${escapeHtml(metric)}</th>`,
  ).join("");
  const rows = entries
    .map((entry, index) => {
      const cells = REPORT_METRICS.map(
        (metric) =>
          `<td class="metric">${escapeHtml(entry.scores[metric] ?? "—")}</td>`,
      ).join("");
      const marker = entry.best ? ` <span class="badge">best</span>` : "";
      return (
        `<tr>` +
        `<td class="count">${index + 1}</td>` +
        `<td class="when">${escapeHtml(entry.receivedAt)}${marker}</td>` +
        cells +
        `</tr>`
      );
    })
    .join("");
  return (
    `<table class="history"><thead><tr>` +
    `<th scope="col">#</th><th scope="col">Received</th>${metricHeads}` +
    `</tr></thead><tbody>${rows}</tbody></table>` +
    `<p class="summary">${escapeHtml(historySummary(entries))}</p>`
  );
}
