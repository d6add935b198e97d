/**
 * Interpreting and rendering the service's response to an upload.
 *
 * Accepted submissions come back as a receipt whose metric values must be
 * shown exactly as the service wrote them (hence raw-literal JSON parsing);
 * rejected ones carry a line-tagged problem list; a submission over the
 * daily limit answers 429 with a Retry-After header and the next allowed
 * time, which the dashboard turns into a live countdown.
 */

import { escapeHtml } from "./html.js";
import {
  JsonObject,
  JsonValue,
  RawNumber,
  asArray,
  asObject,
  displayText,
  parseWithRawNumbers,
} from "./rawJson.js";

export const REPORT_METRICS = [
  "wmcc",
  "accuracy",
  "f1",
  "precision",
  "recall",
] as const;

export type MetricName = (typeof REPORT_METRICS)[number];

export interface AcceptedOutcome {
  kind: "accepted";
  submissionId: string;
  receivedAt: string;
  /** Metric name -> the literal from the payload, e.g. "0.8333333333333334". */
  scores: Record<string, string>;
}

export interface RejectedOutcome {
  kind: "rejected";
  message: string;
  problems: { line: string | null; message: string }[];
}

export interface RateLimitedOutcome {
  kind: "rate_limited";
  message: string;
  /** Seconds until the next submission is allowed, from Retry-After. */
  retryAfterSeconds: number | null;
  /** ISO timestamp of the next allowed submission, when the body carries one. */
  nextAllowed: string | null;
}

export interface ErrorOutcome {
  kind: "error";
  status: number;
  code: string | null;
  message: string;
}

export type SubmissionOutcome =
  | AcceptedOutcome
  | RejectedOutcome
  | RateLimitedOutcome
  | ErrorOutcome;

function errorParts(body: JsonValue): { code: string | null; message: string } {
  try {
    const doc = asObject(body, "error body");
    const code = typeof doc["code"] === "string" ? doc["code"] : null;
    const message =
      typeof doc["message"] === "string" ? doc["message"] : "request failed";
    return { code, message };
  } catch {
    return { code: null, message: "request failed" };
  }
}

/**
 * Classify an upload response.  `bodyText` is the raw response body so that
 * accepted receipts keep their number literals intact.
 */
export function submissionOutcome(
  status: number,
  retryAfter: string | null,
  bodyText: string,
): SubmissionOutcome {
  let body: JsonValue = null;
  try {
    body = parseWithRawNumbers(bodyText);
  } catch {
    body = null;
  }

  if (status === 201) {
    const doc = asObject(body, "receipt");
    const scoresDoc = asObject(doc["scores"], "scores");
    const scores: Record<string, string> = {};
    for (const metric of Object.keys(scoresDoc)) {
      scores[metric] = displayText(scoresDoc[metric]);
    }
    return {
      kind: "accepted",
      submissionId: displayText(doc["submission_id"]),
      receivedAt: displayText(doc["received_at"]),
      scores,
    };
  }

  const { code, message } = errorParts(body);

  if (status === 422) {
    const problems: RejectedOutcome["problems"] = [];
    try {
      const doc = asObject(body, "error body");
      for (const item of asArray(doc["details"], "details")) {
        const entry = asObject(item, "problem");
        const line = entry["line"];
        problems.push({
          line: line instanceof RawNumber ? line.raw : null,
          message: displayText(entry["message"]),
        });
      }
    } catch {
      // A bare 422 without details still renders as a rejection.
    }
    return { kind: "rejected", message, problems };
  }

  if (status === 429) {
    let nextAllowed: string | null = null;
    try {
      const doc = asObject(body, "error body");
      const details = asArray(doc["details"], "details");
      if (details.length > 0) {
        const first = asObject(details[0], "detail");
        if (typeof first["next_allowed"] === "string") {
          nextAllowed = first["next_allowed"];
        }
      }
    } catch {
      nextAllowed = null;
    }
    const parsed = retryAfter === null ? NaN : Number.parseInt(retryAfter, 10);
    return {
      kind: "rate_limited",
      message,
      retryAfterSeconds: Number.isFinite(parsed) ? Math.max(0, parsed) : null,
      nextAllowed,
    };
  }

  return { kind: "error", status, code, message };
}

/** "HH:MM:SS" for a number of seconds, clamped at zero. */
export function countdownLabel(totalSeconds: number): string {
  const clamped = Math.max(0, Math.floor(totalSeconds));
  const hours = Math.floor(clamped / 3600);
  const minutes = Math.floor((clamped % 3600) / 60);
  const seconds = clamped % 60;
  const pad = (n: number): string => String(n).padStart(2, "0");
  return `${pad(hours)}:${pad(minutes)}:${pad(seconds)}`;
}

/**
 * Seconds left on a rate limit, preferring the Retry-After figure anchored
 * at the moment the response arrived, falling back to the next-allowed
 * timestamp.
 */
export function rateLimitSecondsLeft(
  outcome: RateLimitedOutcome,
  receivedAtMs: number,
  nowMs: number,
): number {
  const elapsed = Math.max(0, (nowMs - receivedAtMs) / 1000);
  if (outcome.retryAfterSeconds !== null) {
    return Math.max(0, outcome.retryAfterSeconds - elapsed);
  }
  if (outcome.nextAllowed !== null) {
    const target = Date.parse(outcome.nextAllowed);
    if (Number.isFinite(target)) {
      return Math.max(0, (target - nowMs) / 1000);
    }
  }
  return 0;
}

/**
 * Render an upload outcome as HTML.  For rate limits the countdown is a
 * `span.countdown` whose text the caller refreshes every second via
 * {@link rateLimitSecondsLeft} and {@link countdownLabel}.
 */
export function renderOutcome(
  outcome: SubmissionOutcome,
  secondsLeft?: number,
): string {
  switch (outcome.kind) {
    case "accepted": {
      const cells = REPORT_METRICS.map(
        (metric) =>
          `<tr><th scope="row">${escapeHtml(metric)}</th>` +
          `<td class="metric">${escapeHtml(outcome.scores[metric] ?? "—")}</td></tr>`,
      ).join("");
      return (
        `<div class="outcome accepted">` +
        `<p>Submission <code>${escapeHtml(outcome.submissionId)}</code> accepted at ` +
        `${escapeHtml(outcome.receivedAt)}.</p>` +
        `<table class="scores"><tbody>${cells}</tbody></table></div>`
      );
    }
    case "rejected": {
      const items = outcome.problems
        .map((problem) => {
          const where =
            problem.line === null ? "file" : `line ${escapeHtml(problem.line)}`;
          return `<li><span class="where">${where}</span>: ${escapeHtml(problem.message)}</li>`;
        })
        .join("");
      return (
        `<div class="outcome rejected">` +
        `<p>${escapeHtml(outcome.message)}</p>` +
        `<ul class="problems">${items}</ul></div>`
      );
    }
    case "rate_limited": {
      const seconds =
        secondsLeft !== undefined ? secondsLeft : outcome.retryAfterSeconds ?? 0;
      const until =
        outcome.nextAllowed === null
          ? ""
          : ` (at ${escapeHtml(outcome.nextAllowed)})`;
      return (
        `<div class="outcome rate-limited">` +
        `<p>${escapeHtml(outcome.message)}</p>` +
        `<p>Next upload allowed in ` +
        `<span class="countdown">${countdownLabel(seconds)}</span>${until}.</p></div>`
      );
    }
    case "error":
      return (
        `<div class="outcome error"><p>` +
        `${escapeHtml(String(outcome.status))}` +
        `${outcome.code === null ? "" : " " + escapeHtml(outcome.code)}: ` +
        `${escapeHtml(outcome.message)}</p></div>`
      );
  }
}
