"""REST service over the competition engine.

All mutations go through one CompetitionEngine instance (the single
journal writer); request handlers only translate between HTTP and engine
calls.  Every error response carries the same body shape:

    {"code": "<machine string>", "message": "<human string>", "details": [...]}

with ``code`` drawn from the closed set: ``auth.missing``, ``auth.invalid``,
``auth.forbidden``, ``not_found``, ``config.invalid``, ``config.overlap``,
``participant.duplicate_name``, ``submission.invalid``,
``submission.rate_limited``, ``submission.window_closed``, ``internal``.

Authentication is a bearer token: the host token is fixed in the service
configuration, participant tokens are issued at registration and returned
exactly once.  Tokens are compared in constant time and never logged or
echoed back in error messages.
"""

from __future__ import annotations

import hashlib
import hmac
import json
from pathlib import Path

from fastapi import FastAPI, Request, Response, UploadFile
from fastapi.responses import FileResponse, JSONResponse

from .competition import CompetitionEngine, public_competition
from .errors import (
    ConfigError,
    RateLimited,
    ValidationError,
    WindowClosed,
)
from .metrics import REPORT_METRICS

__all__ = ["ApiError", "create_app", "load_platform_config", "serve"]


class ApiError(Exception):
    """Carries one ErrorBody plus optional extra headers."""

    def __init__(self, status: int, code: str, message: str,
                 details: list | None = None, headers: dict | None = None):
        self.status = status
        self.code = code
        self.message = message
        self.details = details
        self.headers = headers or {}
        super().__init__(message)

    def response(self) -> JSONResponse:
        body = {"code": self.code, "message": self.message}
        if self.details is not None:
            body["details"] = self.details
        return JSONResponse(status_code=self.status, content=body,
                            headers=self.headers)


def _error(status: int, code: str, message: str, **kwargs) -> ApiError:
    return ApiError(status, code, message, **kwargs)


def _bearer_token(request: Request) -> str | None:
    header = request.headers.get("authorization", "")
    scheme, _, token = header.partition(" ")
    if scheme.lower() == "bearer" and token.strip():
        return token.strip()
    return None


def load_platform_config(path) -> dict:
    """Read and validate the service configuration file.

    Required keys: ``journal`` (path), ``host_token``.  Optional:
    ``listen`` ("host:port", default 127.0.0.1:8077), ``cors_origin``,
    ``data_dir``, ``competitions`` (list of competition configs created
    at startup if they do not exist yet).
    """
    path = Path(path)
    try:
        config = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read platform config: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"platform config is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError("platform config must be a JSON object")
    allowed = {"journal", "host_token", "listen", "cors_origin", "data_dir",
               "competitions"}
    unknown = sorted(set(config) - allowed)
    if unknown:
        raise ConfigError(f"unknown platform config keys: {', '.join(unknown)}")
    for key in ("journal", "host_token"):
        if not config.get(key):
            raise ConfigError(f"platform config is missing {key!r}")
    if not str(config["host_token"]).strip():
        raise ConfigError("host_token must not be blank")
    listen = str(config.get("listen", "127.0.0.1:8077"))
    host, _, port = listen.rpartition(":")
    if not host or not port.isdigit():
        raise ConfigError(f"listen must be host:port, got {listen!r}")
    config["listen"] = (host, int(port))
    return config


def create_app(engine: CompetitionEngine, host_token: str,
               cors_origin: str | None = None,
               data_dir=None) -> FastAPI:
    """Build the service around an already-open engine."""
    app = FastAPI(title="neurograde competition service", docs_url=None,
                  redoc_url=None)
    data_root = Path(data_dir) if data_dir else None

    if cors_origin:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=[cors_origin],
            allow_methods=["GET", "POST", "OPTIONS"],
            allow_headers=["Authorization", "Content-Type"],
        )

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return exc.response()

    @app.exception_handler(Exception)
    async def handle_unexpected(request: Request, exc: Exception):
        return JSONResponse(
            status_code=500,
            content={"code": "internal", "message": "internal error"},
        )

    # -- auth ------------------------------------------------------------

    def identify(request: Request):
        """(role, competition_id, participant_id) for the request token."""
        token = _bearer_token(request)
        if token is None:
            raise _error(401, "auth.missing", "missing bearer token",
                         headers={"WWW-Authenticate": "Bearer"})
        if hmac.compare_digest(str(host_token), token):
            return "host", None, None
        ids = engine.authenticate(token)
        if ids is None:
            raise _error(401, "auth.invalid", "unrecognized token",
                         headers={"WWW-Authenticate": "Bearer"})
        return "participant", ids[0], ids[1]

    def require_host(request: Request) -> None:
        role, _, _ = identify(request)
        if role != "host":
            raise _error(403, "auth.forbidden", "host credentials required")

    def require_participant(request: Request, competition_id: str) -> str:
        """Participant id for a token registered to this competition."""
        role, cid, pid = identify(request)
        if role == "host" or cid != competition_id:
            raise _error(403, "auth.forbidden",
                         "a participant token for this competition is required")
        return pid

    def competition_or_404(competition_id: str):
        try:
            return engine.get_competition(competition_id)
        except ConfigError:
            raise _error(404, "not_found",
                         f"no competition {competition_id!r}") from None

    # -- competitions ------------------------------------------------------

    @app.post("/competitions", status_code=201)
    def create_competition(request: Request, body: dict):
        require_host(request)
        try:
            competition = engine.create_competition(body)
        except ConfigError as exc:
            code = ("config.overlap"
                    if "both train and test" in str(exc) else "config.invalid")
            raise _error(400, code, str(exc)) from None
        return JSONResponse(
            status_code=201,
            content={"id": competition.id},
            headers={"Location": f"/competitions/{competition.id}"},
        )

    @app.get("/competitions")
    def list_competitions():
        return [
            public_competition(engine.get_competition(cid))
            for cid in engine.competition_ids()
        ]

    @app.get("/competitions/{competition_id}")
    def get_competition(competition_id: str):
        return public_competition(competition_or_404(competition_id))

    # -- participants ------------------------------------------------------

    @app.post("/competitions/{competition_id}/participants", status_code=201)
    def register(competition_id: str, body: dict):
        competition_or_404(competition_id)
        display_name = str(body.get("display_name", ""))
        team = bool(body.get("team", False))
        try:
            participant = engine.register(competition_id, display_name, team=team)
        except ConfigError as exc:
            if "already taken" in str(exc):
                raise _error(409, "participant.duplicate_name", str(exc)) from None
            raise _error(400, "config.invalid", str(exc)) from None
        # The token appears in this response and nowhere else, ever.
        return {
            "participant_id": participant.id,
            "display_name": participant.display_name,
            "team": participant.team,
            "token": participant.token,
        }

    @app.get("/competitions/{competition_id}/participants")
    def list_participants(competition_id: str):
        competition_or_404(competition_id)
        return [
            {
                "participant_id": participant.id,
                "display_name": participant.display_name,
                "team": participant.team,
            }
            for participant in engine.participants(competition_id)
        ]

    # -- datasets ----------------------------------------------------------

    @app.get("/competitions/{competition_id}/data/{split}")
    def dataset_manifest(request: Request, competition_id: str, split: str):
        if split not in ("train", "test"):
            raise _error(404, "not_found", f"no dataset split {split!r}")
        competition = competition_or_404(competition_id)
        require_participant(request, competition_id)
        if split == "train":
            epochs = [
                {"epoch_id": eid, "grade": grade}
                for eid, grade in sorted(competition.train_labels.items())
            ]
        else:
            # Grades for the test split exist only inside the engine.
            epochs = [{"epoch_id": eid} for eid in competition.test_epoch_ids]
        manifest = {
            "competition_id": competition_id,
            "split": split,
            "epochs": epochs,
        }
        if data_root is not None:
            split_dir = data_root / competition_id / split
            if split_dir.is_dir():
                manifest["files"] = sorted(
                    p.name for p in split_dir.iterdir() if p.is_file()
                )
        return manifest

    @app.get("/competitions/{competition_id}/data/{split}/files/{name}")
    def dataset_file(request: Request, competition_id: str, split: str, name: str):
        competition_or_404(competition_id)
        require_participant(request, competition_id)
        if data_root is None or split not in ("train", "test"):
            raise _error(404, "not_found", "no such file")
        candidate = (data_root / competition_id / split / name).resolve()
        split_dir = (data_root / competition_id / split).resolve()
        if split_dir not in candidate.parents or not candidate.is_file():
            raise _error(404, "not_found", "no such file")
        return FileResponse(candidate)

    # -- submissions ---------------------------------------------------------

    def _receipt(submission) -> dict:
        return {
            "submission_id": submission.id,
            "received_at": submission.received_at.isoformat(),
            "scores": {m: submission.scores[m] for m in REPORT_METRICS},
        }

    @app.post("/competitions/{competition_id}/submissions", status_code=201)
    async def submit(request: Request, competition_id: str,
                     file: UploadFile | None = None):
        competition_or_404(competition_id)
        participant_id = require_participant(request, competition_id)
        if file is not None:
            payload = await file.read()
        else:
            payload = await request.body()
        if not payload:
            raise _error(422, "submission.invalid", "empty upload",
                         details=[])
        try:
            rows = engine.validate_submission(payload, competition_id)
            submission = engine.submit(competition_id, participant_id, rows)
        except ValidationError as exc:
            raise _error(
                422, "submission.invalid", "submission rejected",
                details=[{"line": line, "message": message}
                         for line, message in exc.problems],
            ) from None
        except RateLimited as exc:
            retry_after = max(
                0, int((exc.next_allowed - engine.now()).total_seconds())
            )
            raise _error(
                429, "submission.rate_limited", str(exc),
                details=[{"next_allowed": exc.next_allowed.isoformat()}],
                headers={"Retry-After": str(retry_after)},
            ) from None
        except WindowClosed as exc:
            raise _error(409, "submission.window_closed", str(exc)) from None
        return _receipt(submission)

    @app.get("/competitions/{competition_id}/submissions/mine")
    def my_submissions(request: Request, competition_id: str):
        competition_or_404(competition_id)
        participant_id = require_participant(request, competition_id)
        subs = engine.submissions(competition_id, participant_id)
        best_id = None
        if subs:
            best = max(
                subs,
                key=lambda s: (s.ranking_score, -s.received_at.timestamp()),
            )
            best_id = best.id
        return [
            dict(_receipt(submission), best=submission.id == best_id)
            for submission in subs
        ]

    # -- leaderboard -----------------------------------------------------------

    @app.get("/competitions/{competition_id}/leaderboard")
    def leaderboard(request: Request, competition_id: str, response: Response):
        competition_or_404(competition_id)
        entries = engine.leaderboard(competition_id, viewer="public")
        body = json.dumps(entries, sort_keys=True, separators=(",", ":"))
        etag = '"' + hashlib.sha256(body.encode()).hexdigest()[:32] + '"'
        if request.headers.get("if-none-match") == etag:
            return Response(status_code=304, headers={"ETag": etag})
        response.headers["ETag"] = etag
        return entries

    return app


def serve(config_path) -> None:
    """Run the service until signalled; flush the journal on the way out."""
    import uvicorn

    config = load_platform_config(config_path)
    engine = CompetitionEngine(config["journal"])
    try:
        for competition_config in config.get("competitions", []):
            cid = competition_config.get("id")
            if cid and cid in engine.competition_ids():
                continue
            engine.create_competition(competition_config)
        app = create_app(
            engine,
            host_token=config["host_token"],
            cors_origin=config.get("cors_origin"),
            data_dir=config.get("data_dir"),
        )
        host, port = config["listen"]
        uvicorn.run(app, host=host, port=port, log_level="warning")
    finally:
        engine.snapshot()
        engine.close()
