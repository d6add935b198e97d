import { describe, expect, it } from "vitest";

import { leaderboardEntries, renderLeaderboard } from "../src/leaderboard.js";
import { escapeHtml } from "../src/html.js";

/**
 * A payload in the service's own serialisation, with literals chosen so
 * that any float round-trip would change the bytes: "5.0" renders as "5",
 * "1e-05" as "0.00001", and "-0.0" as "0" if the numbers pass through a
 * JS double on their way to the screen.
 */
const PAYLOAD =
  "[" +
  '{"best":{"scores":{"accuracy":1.0,"f1":1.0,"precision":1.0,"recall":1.0,' +
  '"wmcc":0.8333333333333334},"submitted_at":"2026-04-01T10:00:00+00:00"},' +
  '"display_name":"alpha <i>&co</i>","last":{"scores":{"accuracy":0.875,' +
  '"f1":0.8571428571428571,"precision":0.9,"recall":0.8333333333333334,' +
  '"wmcc":0.30000000000000004},"submitted_at":"2026-04-01T11:00:00+00:00"},' +
  '"participant_id":"p-0001","rank":1,"submissions":7,"team":true},' +
  '{"best":{"scores":{"accuracy":5.0,"f1":1e-05,"precision":-0.0,"recall":0.25,' +
  '"wmcc":0.6000000000000001},"submitted_at":"2026-04-01T12:00:00+00:00"},' +
  '"display_name":"beta","last":{"scores":{"accuracy":5.0,"f1":1e-05,' +
  '"precision":-0.0,"recall":0.25,"wmcc":0.6000000000000001},' +
  '"submitted_at":"2026-04-01T12:00:00+00:00"},' +
  '"participant_id":"p-0002","rank":2,"submissions":1,"team":false}' +
  "]";

describe("leaderboardEntries", () => {
  it("carries every figure as the payload literal", () => {
    const entries = leaderboardEntries(PAYLOAD);
    expect(entries.length).toBe(2);

    const first = entries[0]!;
    expect(first.rank).toBe("1");
    expect(first.displayName).toBe("alpha <i>&co</i>");
    expect(first.team).toBe(true);
    expect(first.submissions).toBe("7");
    expect(first.bestScores["wmcc"]).toBe("0.8333333333333334");
    expect(first.bestScores["accuracy"]).toBe("1.0");
    expect(first.lastScores["wmcc"]).toBe("0.30000000000000004");
    expect(first.bestSubmittedAt).toBe("2026-04-01T10:00:00+00:00");

    const second = entries[1]!;
    expect(second.bestScores["accuracy"]).toBe("5.0");
    expect(second.bestScores["f1"]).toBe("1e-05");
    expect(second.bestScores["precision"]).toBe("-0.0");
    expect(second.team).toBe(false);
  });
});

describe("renderLeaderboard", () => {
  it("shows exactly the payload bytes in every metric cell", () => {
    const html = renderLeaderboard(PAYLOAD);
    const literals = [
      "0.8333333333333334",
      "1.0",
      "5.0",
      "1e-05",
      "-0.0",
      "0.6000000000000001",
      "0.25",
    ];
    for (const literal of literals) {
      expect(html).toContain(`<td class="metric">${literal}</td>`);
    }
    // None of the reformatted shapes may appear in a metric cell.
    expect(html).not.toContain(`<td class="metric">1</td>`);
    expect(html).not.toContain(`<td class="metric">5</td>`);
    expect(html).not.toContain(`<td class="metric">0.00001</td>`);
    expect(html).not.toContain(`<td class="metric">0</td>`);
  });

  it("keeps ranking order and escapes participant names", () => {
    const html = renderLeaderboard(PAYLOAD);
    expect(html.indexOf("alpha")).toBeGreaterThan(-1);
    expect(html.indexOf("alpha")).toBeLessThan(html.indexOf("beta"));
    expect(html).toContain(escapeHtml("alpha <i>&co</i>"));
    expect(html).not.toContain("<i>&co</i>");
    expect(html).toContain(`<span class="badge">team</span>`);
  });

  it("renders an empty state for an empty payload", () => {
    expect(renderLeaderboard("[]")).toContain("No submissions yet");
  });
});
