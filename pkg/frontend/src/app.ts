/**
 * Browser wiring for the competition dashboard.
 *
 * Pure logic lives in the sibling modules (validation, outcome handling,
 * rendering); this file only connects them to the DOM: competition picker,
 * registration, token entry, upload with pre-flight validation, leaderboard
 * polling with ETag reuse, submission history, and the rate-limit countdown
 * tick.
 */

import { ApiClient } from "./api.js";
import { escapeHtml } from "./html.js";
import { renderLeaderboard } from "./leaderboard.js";
import { renderHistory } from "./history.js";
import {
  RateLimitedOutcome,
  SubmissionOutcome,
  countdownLabel,
  rateLimitSecondsLeft,
  renderOutcome,
  submissionOutcome,
} from "./outcome.js";
import { Problem, validateSubmissionBytes } from "./submission.js";

const LEADERBOARD_POLL_MS = 15_000;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

interface CompetitionSummary {
  id: string;
  title: string;
  test_epoch_ids: string[];
  daily_limit: number | null;
}

class Dashboard {
  private readonly api = new ApiClient();
  private competitions: CompetitionSummary[] = [];
  private selected: CompetitionSummary | null = null;
  private leaderboardEtag: string | null = null;
  private countdownTimer: number | null = null;
  private rateLimit: { outcome: RateLimitedOutcome; receivedAtMs: number } | null =
    null;

  private readonly baseInput = el<HTMLInputElement>("base-url");
  private readonly select = el<HTMLSelectElement>("competition-select");
  private readonly statusLine = el<HTMLElement>("status");
  private readonly registerName = el<HTMLInputElement>("register-name");
  private readonly registerTeam = el<HTMLInputElement>("register-team");
  private readonly registerButton = el<HTMLButtonElement>("register-button");
  private readonly registerResult = el<HTMLElement>("register-result");
  private readonly tokenInput = el<HTMLInputElement>("token-input");
  private readonly fileInput = el<HTMLInputElement>("file-input");
  private readonly submitButton = el<HTMLButtonElement>("submit-button");
  private readonly outcomeBox = el<HTMLElement>("outcome");
  private readonly leaderboardBox = el<HTMLElement>("leaderboard");
  private readonly historyBox = el<HTMLElement>("history");

  start(): void {
    this.baseInput.value = window.location.origin;
    this.api.setBaseUrl(this.baseInput.value);
    this.baseInput.addEventListener("change", () => {
      this.api.setBaseUrl(this.baseInput.value);
      void this.loadCompetitions();
    });
    this.select.addEventListener("change", () => {
      this.selectCompetition(this.select.value);
    });
    this.registerButton.addEventListener("click", () => {
      void this.register();
    });
    this.tokenInput.addEventListener("change", () => {
      this.api.setToken(this.tokenInput.value);
      void this.loadHistory();
    });
    this.submitButton.addEventListener("click", () => {
      void this.submit();
    });
    window.setInterval(() => {
      void this.loadLeaderboard();
    }, LEADERBOARD_POLL_MS);
    void this.loadCompetitions();
  }

  private status(text: string): void {
    this.statusLine.textContent = text;
  }

  private async loadCompetitions(): Promise<void> {
    try {
      const response = await this.api.get("/competitions");
      if (response.status !== 200) {
        this.status(`competition list failed (${response.status})`);
        return;
      }
      this.competitions = JSON.parse(response.bodyText) as CompetitionSummary[];
      this.select.innerHTML = this.competitions
        .map(
          (comp) =>
            `<option value="${escapeHtml(comp.id)}">` +
            `${escapeHtml(comp.title || comp.id)}</option>`,
        )
        .join("");
      this.status(`${this.competitions.length} competition(s)`);
      const first = this.competitions[0];
      if (first !== undefined) {
        this.select.value = first.id;
        this.selectCompetition(first.id);
      }
    } catch (error) {
      this.status(`cannot reach service: ${String(error)}`);
    }
  }

  private selectCompetition(id: string): void {
    this.selected = this.competitions.find((comp) => comp.id === id) ?? null;
    this.leaderboardEtag = null;
    this.leaderboardBox.innerHTML = "";
    this.historyBox.innerHTML = "";
    void this.loadLeaderboard();
    void this.loadHistory();
  }

  private async register(): Promise<void> {
    if (this.selected === null) {
      return;
    }
    const response = await this.api.postJson(
      `/competitions/${encodeURIComponent(this.selected.id)}/participants`,
      {
        display_name: this.registerName.value,
        team: this.registerTeam.checked,
      },
    );
    if (response.status === 201) {
      const body = JSON.parse(response.bodyText) as { token: string };
      this.tokenInput.value = body.token;
      this.api.setToken(body.token);
      this.registerResult.innerHTML =
        `<p class="notice">Registered. Your token is shown once in the ` +
        `field above — store it somewhere safe.</p>`;
      void this.loadHistory();
    } else {
      this.registerResult.innerHTML = `<p class="outcome error">${escapeHtml(
        response.bodyText,
      )}</p>`;
    }
  }

  private localProblems(problems: Problem[]): string {
    const items = problems
      .map((problem) => {
        const where = problem.line === null ? "file" : `line ${problem.line}`;
        return `<li><span class="where">${where}</span>: ${escapeHtml(
          problem.message,
        )}</li>`;
      })
      .join("");
    return (
      `<div class="outcome rejected"><p>Checked locally — this file would ` +
      `be rejected, so it was not uploaded.</p><ul class="problems">${items}</ul></div>`
    );
  }

  private async submit(): Promise<void> {
    if (this.selected === null) {
      this.outcomeBox.innerHTML = `<p class="outcome error">Pick a competition first.</p>`;
      return;
    }
    const file = this.fileInput.files?.[0];
    if (file === undefined) {
      this.outcomeBox.innerHTML = `<p class="outcome error">Choose a CSV file first.</p>`;
      return;
    }
    const payload = new Uint8Array(await file.arrayBuffer());
    const verdict = validateSubmissionBytes(payload, this.selected.test_epoch_ids);
    if (!verdict.ok) {
      this.outcomeBox.innerHTML = this.localProblems(verdict.problems);
      return;
    }
    const response = await this.api.uploadCsv(
      `/competitions/${encodeURIComponent(this.selected.id)}/submissions`,
      payload,
    );
    const outcome = submissionOutcome(
      response.status,
      response.retryAfter,
      response.bodyText,
    );
    this.showOutcome(outcome);
    if (outcome.kind === "accepted") {
      this.leaderboardEtag = null;
      void this.loadLeaderboard();
      void this.loadHistory();
    }
  }

  private showOutcome(outcome: SubmissionOutcome): void {
    if (this.countdownTimer !== null) {
      window.clearInterval(this.countdownTimer);
      this.countdownTimer = null;
    }
    this.rateLimit = null;
    this.outcomeBox.innerHTML = renderOutcome(outcome);
    if (outcome.kind === "rate_limited") {
      this.rateLimit = { outcome, receivedAtMs: Date.now() };
      this.countdownTimer = window.setInterval(() => this.tick(), 1000);
    }
  }

  private tick(): void {
    if (this.rateLimit === null) {
      return;
    }
    const seconds = rateLimitSecondsLeft(
      this.rateLimit.outcome,
      this.rateLimit.receivedAtMs,
      Date.now(),
    );
    const span = this.outcomeBox.querySelector(".countdown");
    if (span !== null) {
      span.textContent = countdownLabel(seconds);
    }
    if (seconds <= 0 && this.countdownTimer !== null) {
      window.clearInterval(this.countdownTimer);
      this.countdownTimer = null;
    }
  }

  private async loadLeaderboard(): Promise<void> {
    if (this.selected === null) {
      return;
    }
    const response = await this.api.get(
      `/competitions/${encodeURIComponent(this.selected.id)}/leaderboard`,
      this.leaderboardEtag,
    );
    if (response.status === 304) {
      return;
    }
    if (response.status === 200) {
      this.leaderboardEtag = response.etag;
      this.leaderboardBox.innerHTML = renderLeaderboard(response.bodyText);
    }
  }

  private async loadHistory(): Promise<void> {
    if (this.selected === null || !this.api.hasToken()) {
      return;
    }
    const response = await this.api.get(
      `/competitions/${encodeURIComponent(this.selected.id)}/submissions/mine`,
    );
    if (response.status === 200) {
      this.historyBox.innerHTML = renderHistory(response.bodyText);
    }
  }
}

new Dashboard().start();
