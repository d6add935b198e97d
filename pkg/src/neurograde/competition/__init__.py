"""Hosting machinery for grading competitions.

`journal` persists every state change as checksummed append-only records;
`core` implements the engine itself: competition setup, registration,
submission validation and scoring, rate limiting, leaderboards, and
crash recovery by replaying the journal.
"""

from .core import (
    GRADES,
    SCORED_METRICS,
    Competition,
    CompetitionEngine,
    Participant,
    RankingConfig,
    Submission,
    parse_submission_csv,
    public_competition,
    public_submission,
)
from .journal import Journal, read_journal

__all__ = [
    "GRADES",
    "SCORED_METRICS",
    "Competition",
    "CompetitionEngine",
    "Journal",
    "Participant",
    "RankingConfig",
    "Submission",
    "parse_submission_csv",
    "public_competition",
    "public_submission",
    "read_journal",
]
