import { describe, expect, it } from "vitest";

import {
  countdownLabel,
  rateLimitSecondsLeft,
  renderOutcome,
  submissionOutcome,
} from "../src/outcome.js";

const RECEIPT =
  '{"submission_id":"sub-000042","received_at":"2026-04-01T09:15:00+00:00",' +
  '"scores":{"wmcc":0.8333333333333334,"accuracy":0.875,"f1":0.8571428571428571,' +
  '"precision":0.9,"recall":0.8333333333333334}}';

describe("submissionOutcome", () => {
  it("turns a 201 receipt into raw-literal scores", () => {
    const outcome = submissionOutcome(201, null, RECEIPT);
    expect(outcome.kind).toBe("accepted");
    if (outcome.kind !== "accepted") {
      return;
    }
    expect(outcome.submissionId).toBe("sub-000042");
    expect(outcome.scores["wmcc"]).toBe("0.8333333333333334");
    expect(outcome.scores["f1"]).toBe("0.8571428571428571");
    expect(outcome.scores["precision"]).toBe("0.9");
  });

  it("turns a 422 into a line-tagged problem list", () => {
    const body =
      '{"code":"submission.invalid","message":"submission rejected",' +
      '"details":[{"line":4,"message":"grade 9 outside 1-4"},' +
      '{"line":null,"message":"missing epochs: te003"}]}';
    const outcome = submissionOutcome(422, null, body);
    expect(outcome.kind).toBe("rejected");
    if (outcome.kind !== "rejected") {
      return;
    }
    expect(outcome.problems).toEqual([
      { line: "4", message: "grade 9 outside 1-4" },
      { line: null, message: "missing epochs: te003" },
    ]);
    const html = renderOutcome(outcome);
    expect(html).toContain("line 4");
    expect(html).toContain("grade 9 outside 1-4");
    expect(html).toContain("file");
  });

  it("turns a 429 into a rate limit with both clocks", () => {
    const body =
      '{"code":"submission.rate_limited",' +
      '"message":"daily submission limit reached, next allowed at 2026-04-02T00:00:00+00:00",' +
      '"details":[{"next_allowed":"2026-04-02T00:00:00+00:00"}]}';
    const outcome = submissionOutcome(429, "52200", body);
    expect(outcome.kind).toBe("rate_limited");
    if (outcome.kind !== "rate_limited") {
      return;
    }
    expect(outcome.retryAfterSeconds).toBe(52200);
    expect(outcome.nextAllowed).toBe("2026-04-02T00:00:00+00:00");
  });

  it("maps anything else to a generic error", () => {
    const outcome = submissionOutcome(
      409,
      null,
      '{"code":"submission.window_closed","message":"submission window closed"}',
    );
    expect(outcome.kind).toBe("error");
    if (outcome.kind !== "error") {
      return;
    }
    expect(outcome.status).toBe(409);
    expect(outcome.code).toBe("submission.window_closed");
  });
});

describe("countdownLabel", () => {
  it("formats HH:MM:SS", () => {
    expect(countdownLabel(0)).toBe("00:00:00");
    expect(countdownLabel(1)).toBe("00:00:01");
    expect(countdownLabel(61)).toBe("00:01:01");
    expect(countdownLabel(3661)).toBe("01:01:01");
    expect(countdownLabel(52200)).toBe("14:30:00");
    expect(countdownLabel(86399)).toBe("23:59:59");
  });

  it("clamps negatives and truncates fractions", () => {
    expect(countdownLabel(-5)).toBe("00:00:00");
    expect(countdownLabel(59.9)).toBe("00:00:59");
  });
});

describe("rateLimitSecondsLeft", () => {
  const outcome = submissionOutcome(
    429,
    "600",
    '{"code":"submission.rate_limited","message":"daily submission limit reached",' +
      '"details":[{"next_allowed":"2026-04-02T00:00:00+00:00"}]}',
  );
  if (outcome.kind !== "rate_limited") {
    throw new Error("fixture must be rate limited");
  }

  it("anchors Retry-After at the response time", () => {
    const t0 = Date.parse("2026-04-01T23:50:00+00:00");
    expect(rateLimitSecondsLeft(outcome, t0, t0)).toBe(600);
    expect(rateLimitSecondsLeft(outcome, t0, t0 + 240_000)).toBe(360);
    expect(rateLimitSecondsLeft(outcome, t0, t0 + 999_000)).toBe(0);
  });

  it("falls back to the next-allowed timestamp", () => {
    const headerless = { ...outcome, retryAfterSeconds: null };
    const now = Date.parse("2026-04-01T23:00:00+00:00");
    expect(rateLimitSecondsLeft(headerless, now, now)).toBe(3600);
  });
});

describe("a day at the submission desk", () => {
  /**
   * The service allows five submissions per UTC day.  Replay the response
   * sequence a participant sees when uploading six times on the same day:
   * five receipts, then a 429 — and the sixth render must show the
   * countdown to the next allowed submission.
   */
  const sameDayResponses = [
    ...[1, 2, 3, 4, 5].map((n) => ({
      status: 201,
      retryAfter: null as string | null,
      body:
        `{"submission_id":"sub-00000${n}",` +
        `"received_at":"2026-04-01T0${n}:00:00+00:00",` +
        `"scores":{"wmcc":0.6,"accuracy":0.8,"f1":0.7,"precision":0.7,"recall":0.7}}`,
    })),
    {
      status: 429,
      retryAfter: "52200",
      body:
        '{"code":"submission.rate_limited",' +
        '"message":"daily submission limit reached, next allowed at 2026-04-02T00:00:00+00:00",' +
        '"details":[{"next_allowed":"2026-04-02T00:00:00+00:00"}]}',
    },
  ];

  it("renders the rate-limit countdown on the sixth same-day upload", () => {
    const outcomes = sameDayResponses.map((r) =>
      submissionOutcome(r.status, r.retryAfter, r.body),
    );
    for (const outcome of outcomes.slice(0, 5)) {
      expect(outcome.kind).toBe("accepted");
    }
    const sixth = outcomes[5]!;
    expect(sixth.kind).toBe("rate_limited");
    const html = renderOutcome(sixth);
    expect(html).toContain('class="countdown"');
    expect(html).toContain("14:30:00");
    expect(html).toContain("2026-04-02T00:00:00+00:00");

    // And the countdown keeps ticking from the response time.
    if (sixth.kind === "rate_limited") {
      const t0 = Date.parse("2026-04-01T09:30:00+00:00");
      const later = rateLimitSecondsLeft(sixth, t0, t0 + 3_600_000);
      expect(countdownLabel(later)).toBe("13:30:00");
      expect(renderOutcome(sixth, later)).toContain("13:30:00");
    }
  });
});
