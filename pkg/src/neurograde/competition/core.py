"""Competition state machine over the append-only journal.

One engine instance owns one journal file and is the single writer for
every competition stored in it.  All mutating calls validate against the
current state, append one journal record, then apply that record to the
in-memory state; recovery replays the same records through the same apply
functions, so a restart always reproduces the identical state.

Confidentiality: hidden test labels and ranking weights live only inside
the engine and its journal.  Everything callers may publish is built by
the `public_*` functions, which copy from an explicit allowlist of fields;
nothing is ever exported by generic serialization of internal objects.
The public leaderboard also omits the ranking score itself, because a
score numerically equal to one of the displayed metrics would reveal
which metric drives the ranking.
"""

from __future__ import annotations

import csv
import hmac
import io
import secrets
import threading
from dataclasses import dataclass, field
from datetime import datetime, time, timedelta, timezone
from pathlib import Path

from ..errors import (
    ConfigError,
    RateLimited,
    RecoveryError,
    ValidationError,
    WindowClosed,
)
from ..metrics import (
    REPORT_METRICS,
    confusion,
    leaderboard_score,
    mcc,
    prf_accuracy,
    weighted_cm,
)
from .journal import Journal

__all__ = [
    "GRADES",
    "SCORED_METRICS",
    "RankingConfig",
    "Competition",
    "Participant",
    "Submission",
    "CompetitionEngine",
    "parse_submission_csv",
    "public_competition",
    "public_submission",
]

GRADES = (1, 2, 3, 4)
SCORED_METRICS = ("wmcc", "mcc", "accuracy", "f1", "precision", "recall")
SUBMISSION_HEADER = ("epoch_id", "grade", "probability")
OP_VERSION = 1


def _utc(value, what: str) -> datetime:
    """Coerce an ISO string or datetime to an aware UTC datetime."""
    if isinstance(value, str):
        try:
            value = datetime.fromisoformat(value)
        except ValueError as exc:
            raise ConfigError(f"{what} is not an ISO timestamp: {value!r}") from exc
    if not isinstance(value, datetime):
        raise ConfigError(f"{what} must be a timestamp, got {type(value).__name__}")
    if value.tzinfo is None:
        return value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc)


def _check_labels(labels, what: str) -> dict[str, int]:
    if not isinstance(labels, dict) or not labels:
        raise ConfigError(f"{what} must be a non-empty mapping of epoch id to grade")
    out = {}
    for eid, grade in labels.items():
        eid = str(eid)
        if not eid:
            raise ConfigError(f"{what} contains an empty epoch id")
        if not isinstance(grade, int) or isinstance(grade, bool) or grade not in GRADES:
            raise ConfigError(f"{what}[{eid!r}] grade {grade!r} outside {GRADES}")
        out[eid] = grade
    return out


@dataclass(frozen=True)
class RankingConfig:
    """Metric weights deciding leaderboard order; hidden from participants."""

    weights: dict[str, float] = field(repr=False)
    hidden: bool = True

    def __post_init__(self) -> None:
        # leaderboard_score performs the full validity check.
        probe = {name: 0.0 for name in SCORED_METRICS}
        leaderboard_score(probe, self.weights)

    def score(self, metric_values: dict[str, float]) -> float:
        return leaderboard_score(metric_values, self.weights)


@dataclass(frozen=True)
class Competition:
    id: str
    title: str
    description: str
    train_labels: dict[str, int]
    test_epoch_ids: tuple[str, ...]
    hidden_test_labels: dict[str, int] = field(repr=False)
    ranking: RankingConfig = field(repr=False)
    window_open: datetime | None
    window_close: datetime | None
    daily_limit: int

    def __post_init__(self) -> None:
        if self.daily_limit < 1:
            raise ConfigError("daily_limit must be at least 1")
        if set(self.hidden_test_labels) != set(self.test_epoch_ids):
            raise ConfigError("hidden labels must cover exactly the test epochs")


@dataclass(frozen=True)
class Participant:
    id: str
    display_name: str
    token: str = field(repr=False)
    team: bool = False


@dataclass(frozen=True)
class Submission:
    id: str
    participant_id: str
    received_at: datetime
    rows: dict[str, tuple[int, float]]
    scores: dict[str, float]
    ranking_score: float


def parse_submission_csv(csv_bytes: bytes, test_epoch_ids) -> dict[str, tuple[int, float]]:
    """Parse and fully validate a submission CSV against the test epochs.

    Returns {epoch_id: (grade, probability)} or raises ValidationError
    carrying every defect found, each tagged with its 1-based line number
    where one applies.
    """
    expected = set(test_epoch_ids)
    problems: list[tuple[int | None, str]] = []
    try:
        text = bytes(csv_bytes).decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ValidationError([(None, f"file is not valid UTF-8: {exc}")]) from exc
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError([(None, "file is empty")]) from None
    except csv.Error as exc:
        raise ValidationError(
            [(1, f"header row is not parseable CSV: {exc}")]
        ) from exc
    if [cell.strip() for cell in header] != list(SUBMISSION_HEADER):
        raise ValidationError(
            [(1, f"header must be {','.join(SUBMISSION_HEADER)!r}")]
        )
    rows: dict[str, tuple[int, float]] = {}
    seen: set[str] = set()
    while True:
        try:
            record = next(reader)
        except StopIteration:
            break
        except csv.Error as exc:
            problems.append(
                (reader.line_num, f"row is not parseable CSV: {exc}")
            )
            break
        line = reader.line_num
        if not record or all(not cell.strip() for cell in record):
            continue
        if len(record) != 3:
            problems.append((line, f"expected 3 fields, got {len(record)}"))
            continue
        eid, grade_text, prob_text = (cell.strip() for cell in record)
        if not eid:
            problems.append((line, "empty epoch id"))
            continue
        if eid not in expected:
            problems.append((line, f"unknown epoch id {eid!r}"))
            continue
        if eid in seen:
            problems.append((line, f"duplicate row for epoch {eid!r}"))
            continue
        seen.add(eid)
        try:
            grade = int(grade_text)
        except ValueError:
            problems.append((line, f"grade must be an integer, got {grade_text!r}"))
            continue
        if grade not in GRADES:
            problems.append((line, f"grade {grade} outside 1-4"))
            continue
        try:
            probability = float(prob_text)
        except ValueError:
            problems.append(
                (line, f"probability must be a number, got {prob_text!r}")
            )
            continue
        if not 0.0 <= probability <= 1.0:
            problems.append((line, f"probability {probability} outside [0, 1]"))
            continue
        rows[eid] = (grade, probability)
    missing = sorted(expected - seen)
    if missing:
        problems.append((None, f"missing epochs: {', '.join(missing)}"))
    if problems:
        raise ValidationError(problems)
    return rows


def _check_rows(rows, test_epoch_ids) -> dict[str, tuple[int, float]]:
    """Validate an already-parsed row mapping (same rules, no line numbers)."""
    problems: list[tuple[int | None, str]] = []
    expected = set(test_epoch_ids)
    clean: dict[str, tuple[int, float]] = {}
    for eid, value in dict(rows).items():
        eid = str(eid)
        try:
            grade, probability = value
        except (TypeError, ValueError):
            problems.append((None, f"row {eid!r} must be (grade, probability)"))
            continue
        if eid not in expected:
            problems.append((None, f"unknown epoch id {eid!r}"))
            continue
        if not isinstance(grade, int) or isinstance(grade, bool) or grade not in GRADES:
            problems.append((None, f"grade {grade!r} for {eid!r} outside 1-4"))
            continue
        probability = float(probability)
        if not 0.0 <= probability <= 1.0:
            problems.append(
                (None, f"probability {probability} for {eid!r} outside [0, 1]")
            )
            continue
        clean[eid] = (grade, probability)
    missing = sorted(expected - set(clean))
    if missing:
        problems.append((None, f"missing epochs: {', '.join(missing)}"))
    if problems:
        raise ValidationError(problems)
    return clean


def _score_rows(rows, hidden_labels) -> dict[str, float]:
    order = sorted(hidden_labels)
    y_true = [hidden_labels[eid] for eid in order]
    y_pred = [rows[eid][0] for eid in order]
    cm = confusion(y_true, y_pred)
    prf = prf_accuracy(cm)
    return {
        "wmcc": mcc(weighted_cm(cm)),
        "mcc": mcc(cm),
        "accuracy": prf["accuracy"],
        "f1": prf["f1"],
        "precision": prf["precision"],
        "recall": prf["recall"],
    }


def public_competition(comp: Competition) -> dict:
    """Participant-facing view: published labels and schedule only."""
    return {
        "id": comp.id,
        "title": comp.title,
        "description": comp.description,
        "train_labels": dict(comp.train_labels),
        "test_epoch_ids": list(comp.test_epoch_ids),
        "window_open": comp.window_open.isoformat() if comp.window_open else None,
        "window_close": comp.window_close.isoformat() if comp.window_close else None,
        "daily_limit": comp.daily_limit,
    }


def public_submission(sub: Submission) -> dict:
    """Submitter-facing receipt: reported metric values, no ranking score."""
    return {
        "id": sub.id,
        "participant_id": sub.participant_id,
        "received_at": sub.received_at.isoformat(),
        "scores": {name: sub.scores[name] for name in REPORT_METRICS},
    }


class _CompetitionState:
    """Mutable per-competition containers around the frozen config."""

    def __init__(self, competition: Competition):
        self.competition = competition
        self.participants: dict[str, Participant] = {}
        self.submissions: list[Submission] = []


class CompetitionEngine:
    """Single-writer engine over one journal file.

    `now_fn` supplies the clock for submissions that do not pass `now`
    explicitly; inject a fake for tests.  Every `snapshot_every` journaled
    operations a full state snapshot is appended so recovery does not
    have to replay from the beginning of time.
    """

    def __init__(self, journal_path, snapshot_every: int = 500, now_fn=None):
        if snapshot_every < 1:
            raise ConfigError("snapshot_every must be at least 1")
        self._now_fn = now_fn or (lambda: datetime.now(timezone.utc))
        self._snapshot_every = snapshot_every
        self._ops_since_snapshot = 0
        self._lock = threading.RLock()
        self._states: dict[str, _CompetitionState] = {}
        self._tokens: dict[str, tuple[str, str]] = {}
        self._journal = Journal(journal_path)
        self._replay(self._journal.entries)

    # -- lifecycle -------------------------------------------------------------

    def close(self) -> None:
        self._journal.close()

    def __enter__(self) -> "CompetitionEngine":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- recovery --------------------------------------------------------------

    def _replay(self, entries) -> None:
        start = 0
        for k, (_, record) in enumerate(entries):
            if record.get("kind") == "snapshot":
                start = k
        for offset, record in entries[start:]:
            try:
                kind = record["kind"]
                if record["v"] != OP_VERSION:
                    raise RecoveryError(
                        f"unsupported record version {record['v']}", offset=offset
                    )
                if kind == "snapshot":
                    self._restore(record["state"])
                elif kind == "create":
                    self._apply_create(record)
                elif kind == "register":
                    self._apply_register(record)
                elif kind == "submit":
                    self._apply_submit(record)
                else:
                    raise RecoveryError(f"unknown record kind {kind!r}", offset=offset)
            except RecoveryError:
                raise
            except (KeyError, TypeError, ValueError, ConfigError) as exc:
                raise RecoveryError(
                    f"journal record cannot be applied: {exc}", offset=offset
                ) from exc

    def _restore(self, state: dict) -> None:
        self._states = {}
        self._tokens = {}
        for cid, comp_state in state["competitions"].items():
            record = {"v": OP_VERSION, "kind": "create", "competition": comp_state}
            self._apply_create(record)
            for participant in comp_state["participants"]:
                self._apply_register(
                    {"v": OP_VERSION, "kind": "register",
                     "competition_id": cid, "participant": participant}
                )
            for submission in comp_state["submissions"]:
                self._apply_submit(
                    {"v": OP_VERSION, "kind": "submit",
                     "competition_id": cid, "submission": submission}
                )

    # -- journaling ------------------------------------------------------------

    def _commit(self, record: dict, apply):
        # Journal first, then apply, and only then consider a snapshot, so
        # any snapshot always includes the operation that triggered it.
        self._journal.append(record)
        applied = apply(record)
        self._ops_since_snapshot += 1
        if self._ops_since_snapshot >= self._snapshot_every:
            self.snapshot()
        return applied

    def snapshot(self) -> None:
        """Append a full-state snapshot record to the journal."""
        with self._lock:
            self._journal.append(
                {"v": OP_VERSION, "kind": "snapshot", "state": self.state_dict()}
            )
            self._ops_since_snapshot = 0

    def state_dict(self) -> dict:
        """Canonical JSON-ready image of the full engine state."""
        competitions = {}
        for cid, state in self._states.items():
            comp = state.competition
            competitions[cid] = {
                "id": comp.id,
                "title": comp.title,
                "description": comp.description,
                "train_labels": dict(comp.train_labels),
                "test_epoch_ids": list(comp.test_epoch_ids),
                "hidden_test_labels": dict(comp.hidden_test_labels),
                "ranking_weights": dict(comp.ranking.weights),
                "ranking_hidden": comp.ranking.hidden,
                "window_open": comp.window_open.isoformat()
                if comp.window_open else None,
                "window_close": comp.window_close.isoformat()
                if comp.window_close else None,
                "daily_limit": comp.daily_limit,
                "participants": [
                    {"id": p.id, "display_name": p.display_name,
                     "token": p.token, "team": p.team}
                    for p in state.participants.values()
                ],
                "submissions": [
                    {"id": s.id, "participant_id": s.participant_id,
                     "received_at": s.received_at.isoformat(),
                     "rows": {eid: [g, p] for eid, (g, p) in s.rows.items()},
                     "scores": dict(s.scores),
                     "ranking_score": s.ranking_score}
                    for s in state.submissions
                ],
            }
        return {"competitions": competitions}

    # -- apply functions (shared by live calls and replay) ----------------------

    def _apply_create(self, record: dict) -> Competition:
        doc = record["competition"]
        ranking = RankingConfig(
            weights={str(k): float(v) for k, v in doc["ranking_weights"].items()},
            hidden=bool(doc.get("ranking_hidden", True)),
        )
        comp = Competition(
            id=doc["id"],
            title=doc["title"],
            description=doc.get("description", ""),
            train_labels=_check_labels(doc["train_labels"], "train_labels"),
            test_epoch_ids=tuple(doc["test_epoch_ids"]),
            hidden_test_labels=_check_labels(
                doc["hidden_test_labels"], "test_labels"
            ),
            ranking=ranking,
            window_open=_utc(doc["window_open"], "window open")
            if doc.get("window_open") else None,
            window_close=_utc(doc["window_close"], "window close")
            if doc.get("window_close") else None,
            daily_limit=int(doc["daily_limit"]),
        )
        if comp.id in self._states:
            raise ConfigError(f"competition id {comp.id!r} already exists")
        self._states[comp.id] = _CompetitionState(comp)
        return comp

    def _apply_register(self, record: dict) -> Participant:
        state = self._state(record["competition_id"])
        doc = record["participant"]
        participant = Participant(
            id=doc["id"],
            display_name=doc["display_name"],
            token=doc["token"],
            team=bool(doc.get("team", False)),
        )
        state.participants[participant.id] = participant
        self._tokens[participant.token] = (
            state.competition.id, participant.id
        )
        return participant

    def _apply_submit(self, record: dict) -> Submission:
        state = self._state(record["competition_id"])
        doc = record["submission"]
        submission = Submission(
            id=doc["id"],
            participant_id=doc["participant_id"],
            received_at=_utc(doc["received_at"], "received_at"),
            rows={eid: (int(g), float(p))
                  for eid, (g, p) in doc["rows"].items()},
            scores={str(k): float(v) for k, v in doc["scores"].items()},
            ranking_score=float(doc["ranking_score"]),
        )
        state.submissions.append(submission)
        return submission

    # -- operations ------------------------------------------------------------

    def create_competition(self, config: dict) -> Competition:
        """Create and persist a competition from a config mapping.

        Expected keys: title, train_labels, test_labels, ranking
        ({"weights": {...}, "hidden": bool}); optional: id, description,
        window ({"open": ..., "close": ...}), daily_limit (default 5).
        """
        if not isinstance(config, dict):
            raise ConfigError("competition config must be a mapping")
        allowed = {"id", "title", "description", "train_labels", "test_labels",
                   "ranking", "window", "daily_limit"}
        unknown = sorted(set(config) - allowed)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        for key in ("title", "train_labels", "test_labels", "ranking"):
            if key not in config:
                raise ConfigError(f"config is missing {key!r}")
        title = str(config["title"]).strip()
        if not title:
            raise ConfigError("title must not be empty")
        train = _check_labels(config["train_labels"], "train_labels")
        test = _check_labels(config["test_labels"], "test_labels")
        overlap = sorted(set(train) & set(test))
        if overlap:
            raise ConfigError(
                f"epochs appear in both train and test: {', '.join(overlap)}"
            )
        ranking = config["ranking"]
        if not isinstance(ranking, dict) or "weights" not in ranking:
            raise ConfigError('ranking must be {"weights": {...}}')
        window = config.get("window") or {}
        if not isinstance(window, dict) or not set(window) <= {"open", "close"}:
            raise ConfigError('window must be {"open": ..., "close": ...}')
        window_open = _utc(window["open"], "window open") if window.get("open") else None
        window_close = _utc(window["close"], "window close") if window.get("close") else None
        if window_open and window_close and window_open >= window_close:
            raise ConfigError("window must open before it closes")
        with self._lock:
            cid = str(config.get("id") or f"comp-{secrets.token_hex(4)}")
            record = {
                "v": OP_VERSION,
                "kind": "create",
                "competition": {
                    "id": cid,
                    "title": title,
                    "description": str(config.get("description", "")),
                    "train_labels": train,
                    "test_epoch_ids": sorted(test),
                    "hidden_test_labels": test,
                    "ranking_weights": {
                        str(k): float(v) for k, v in ranking["weights"].items()
                    },
                    "ranking_hidden": bool(ranking.get("hidden", True)),
                    "window_open": window_open.isoformat() if window_open else None,
                    "window_close": window_close.isoformat() if window_close else None,
                    "daily_limit": int(config.get("daily_limit", 5)),
                },
            }
            # Validate fully before touching the journal.
            probe = dict(record["competition"])
            RankingConfig(weights=probe["ranking_weights"],
                          hidden=probe["ranking_hidden"])
            if probe["daily_limit"] < 1:
                raise ConfigError("daily_limit must be at least 1")
            if cid in self._states:
                raise ConfigError(f"competition id {cid!r} already exists")
            return self._commit(record, self._apply_create)

    def register(self, competition_id: str, display_name: str,
                 team: bool = False) -> Participant:
        """Add a participant; returns the credential-bearing record."""
        display_name = str(display_name).strip()
        if not display_name:
            raise ConfigError("display name must not be empty")
        with self._lock:
            state = self._state(competition_id)
            taken = {p.display_name for p in state.participants.values()}
            if display_name in taken:
                raise ConfigError(
                    f"display name {display_name!r} already taken"
                )
            record = {
                "v": OP_VERSION,
                "kind": "register",
                "competition_id": state.competition.id,
                "participant": {
                    "id": f"part-{secrets.token_hex(6)}",
                    "display_name": display_name,
                    "token": secrets.token_hex(16),
                    "team": bool(team),
                },
            }
            return self._commit(record, self._apply_register)

    def validate_submission(self, csv_bytes: bytes,
                            competition_id: str) -> dict[str, tuple[int, float]]:
        """Parse a submission CSV against a competition's test epochs."""
        with self._lock:
            comp = self._state(competition_id).competition
        return parse_submission_csv(csv_bytes, comp.test_epoch_ids)

    def submit(self, competition_id: str, participant_id: str, rows,
               now: datetime | None = None) -> Submission:
        """Score and record one submission.

        The window check, the rate-limit check, and the journal append all
        happen under one lock, so concurrent submitters can never exceed
        the daily limit.
        """
        with self._lock:
            state = self._state(competition_id)
            comp = state.competition
            if participant_id not in state.participants:
                raise ConfigError(
                    f"participant {participant_id!r} is not registered"
                )
            clean = _check_rows(rows, comp.test_epoch_ids)
            at = _utc(now if now is not None else self._now_fn(), "now")
            if comp.window_open and at < comp.window_open:
                raise WindowClosed(
                    f"submissions open at {comp.window_open.isoformat()}"
                )
            if comp.window_close and at > comp.window_close:
                raise WindowClosed(
                    f"submissions closed at {comp.window_close.isoformat()}"
                )
            today = at.date()
            used = sum(
                1 for s in state.submissions
                if s.participant_id == participant_id
                and s.received_at.date() == today
            )
            if used >= comp.daily_limit:
                midnight = datetime.combine(
                    today + timedelta(days=1), time(0, 0), tzinfo=timezone.utc
                )
                raise RateLimited(midnight)
            scores = _score_rows(clean, comp.hidden_test_labels)
            record = {
                "v": OP_VERSION,
                "kind": "submit",
                "competition_id": comp.id,
                "submission": {
                    "id": f"sub-{len(state.submissions) + 1:06d}",
                    "participant_id": participant_id,
                    "received_at": at.isoformat(),
                    "rows": {eid: [g, p] for eid, (g, p) in clean.items()},
                    "scores": scores,
                    "ranking_score": comp.ranking.score(scores),
                },
            }
            return self._commit(record, self._apply_submit)

    # -- reads -----------------------------------------------------------------

    def _state(self, competition_id: str) -> _CompetitionState:
        try:
            return self._states[str(competition_id)]
        except KeyError:
            raise ConfigError(
                f"unknown competition {competition_id!r}"
            ) from None

    def now(self) -> datetime:
        """Current time on the engine's (possibly injected) clock."""
        return _utc(self._now_fn(), "now")

    def competition_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._states)

    def get_competition(self, competition_id: str) -> Competition:
        with self._lock:
            return self._state(competition_id).competition

    def participants(self, competition_id: str) -> list[Participant]:
        with self._lock:
            state = self._state(competition_id)
            return sorted(state.participants.values(), key=lambda p: p.id)

    def get_participant(self, competition_id: str,
                        participant_id: str) -> Participant:
        with self._lock:
            state = self._state(competition_id)
            try:
                return state.participants[participant_id]
            except KeyError:
                raise ConfigError(
                    f"unknown participant {participant_id!r}"
                ) from None

    def authenticate(self, token: str) -> tuple[str, str] | None:
        """(competition_id, participant_id) for a valid token, else None."""
        token = str(token)
        with self._lock:
            for stored, ids in self._tokens.items():
                if hmac.compare_digest(stored, token):
                    return ids
        return None

    def submissions(self, competition_id: str,
                    participant_id: str | None = None) -> list[Submission]:
        with self._lock:
            subs = list(self._state(competition_id).submissions)
        if participant_id is not None:
            subs = [s for s in subs if s.participant_id == participant_id]
        return subs

    def leaderboard(self, competition_id: str,
                    viewer: str = "public") -> list[dict]:
        """Ranked entries for everyone with at least one submission.

        The public view carries metric values for each participant's best
        and latest submissions.  The host view adds the ranking scores and
        each entry keeps the participant's credentials out regardless.
        """
        if viewer not in ("public", "host"):
            raise ConfigError(f"viewer must be 'public' or 'host', got {viewer!r}")
        with self._lock:
            state = self._state(competition_id)
            per_participant: dict[str, list[Submission]] = {}
            for sub in state.submissions:
                per_participant.setdefault(sub.participant_id, []).append(sub)
            ranked = []
            for pid, subs in per_participant.items():
                best = max(
                    subs, key=lambda s: (s.ranking_score, -s.received_at.timestamp())
                )
                last = subs[-1]
                ranked.append((pid, best, last))
            ranked.sort(
                key=lambda item: (-item[1].ranking_score,
                                  item[1].received_at.timestamp())
            )
            entries = []
            for rank, (pid, best, last) in enumerate(ranked, start=1):
                participant = state.participants[pid]
                entry = {
                    "rank": rank,
                    "participant_id": pid,
                    "display_name": participant.display_name,
                    "team": participant.team,
                    "submissions": len(per_participant[pid]),
                    "best": {
                        "submitted_at": best.received_at.isoformat(),
                        "scores": {m: best.scores[m] for m in REPORT_METRICS},
                    },
                    "last": {
                        "submitted_at": last.received_at.isoformat(),
                        "scores": {m: last.scores[m] for m in REPORT_METRICS},
                    },
                }
                if viewer == "host":
                    entry["best"]["ranking_score"] = best.ranking_score
                    entry["last"]["ranking_score"] = last.ranking_score
                entries.append(entry)
            return entries

    def ranking_weights(self, competition_id: str, viewer: str) -> dict[str, float]:
        """The ranking weights; host-only while the config is hidden."""
        with self._lock:
            comp = self._state(competition_id).competition
        if viewer != "host" and comp.ranking.hidden:
            raise ConfigError("ranking weights are hidden from participants")
        return dict(comp.ranking.weights)
