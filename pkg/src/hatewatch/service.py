"""REST moderation API.

JSON over ``/api/v1``: single-comment scoring (with automatic language
routing and feedback capture), whole-page percentage scoring, the submit-time
notifier check, review-queue access, and the retrain trigger.  Errors use a
machine-readable ``{"error": {"code", "message"}}`` envelope — 422 for
validation, 404 for missing resources, 409 for refused operations, 500 for
everything unexpected.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, fields
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import langid
from .corpus import LABELS
from .hub import (
    AlreadyResolvedError,
    FeedbackRecord,
    Hub,
    HubError,
    NoModelError,
    RetrainPolicy,
    UnknownRecordError,
)
from .textnorm import LANGUAGES, default_lexicons

__all__ = ["ServiceConfig", "create_app", "app_factory"]

CONFIG_ENV = "HATEWATCH_CONFIG"
LISTEN_ENV = "HATEWATCH_LISTEN"


@dataclass(frozen=True)
class ServiceConfig:
    """Service settings; every threshold the routers use lives here."""

    host: str = "127.0.0.1"
    port: int = 8000
    hub_root: str = "hub-data"
    base_corpus: str | None = None
    confidence_threshold: float = 0.60
    min_resolved: int = 50
    devanagari_threshold: float = 0.30
    codemix_threshold: float = 0.15
    max_text_length: int = 10_000
    max_page_comments: int = 1_000
    static_dir: str | None = None

    def __post_init__(self) -> None:
        if self.port < 1 or self.port > 65535:
            raise ValueError("port must be in [1, 65535]")
        if self.max_text_length < 1 or self.max_page_comments < 1:
            raise ValueError("size limits must be positive")

    @classmethod
    def from_file(cls, path) -> "ServiceConfig":
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_env(cls) -> "ServiceConfig":
        """Environment bootstrap: config path and listen address overrides."""
        config_path = os.environ.get(CONFIG_ENV)
        config = cls.from_file(config_path) if config_path else cls()
        listen = os.environ.get(LISTEN_ENV)
        if listen:
            host, _, port = listen.rpartition(":")
            from dataclasses import replace

            config = replace(config, host=host or config.host, port=int(port))
        return config


class _ApiError(Exception):
    """Request-level failure carrying an HTTP status and machine code."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code


def _envelope(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message}})


_HUB_STATUS = {
    UnknownRecordError: 404,
    NoModelError: 404,
    AlreadyResolvedError: 409,
}


def _record_json(record: FeedbackRecord) -> dict:
    obj = record.to_json()
    obj.pop("kind")
    return obj


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise _ApiError(422, "invalid_json", f"request body is not valid JSON: {exc}") from exc
    if not isinstance(body, dict):
        raise _ApiError(422, "validation", "request body must be a JSON object")
    return body


def _validate_text(value, max_length: int) -> str:
    if not isinstance(value, str):
        raise _ApiError(422, "validation", "field 'text' must be a string")
    if not value.strip():
        raise _ApiError(422, "validation", "field 'text' must be non-empty")
    if len(value) > max_length:
        raise _ApiError(422, "validation", f"text exceeds {max_length} characters")
    return value


def _parse_record_flag(request: Request) -> bool:
    raw = request.query_params.get("record", "true").lower()
    if raw in ("true", "1", "yes"):
        return True
    if raw in ("false", "0", "no"):
        return False
    raise _ApiError(422, "validation", "query flag 'record' must be true or false")


def create_app(config: ServiceConfig = None, hub: Hub = None) -> FastAPI:
    """Wire the application; ``hub`` may be injected for tests."""
    config = config or ServiceConfig()
    lexicons = default_lexicons()
    if hub is None:
        hub = Hub(
            config.hub_root,
            policy=RetrainPolicy(
                confidence_threshold=config.confidence_threshold,
                min_resolved=config.min_resolved,
                base_corpus=config.base_corpus,
            ),
            lexicons=lexicons,
        )

    app = FastAPI(title="hatewatch", version="1", docs_url=None, redoc_url=None)
    app.state.config = config
    app.state.hub = hub

    @app.exception_handler(_ApiError)
    async def handle_api_error(request: Request, exc: _ApiError):
        return _envelope(exc.status, exc.code, str(exc))

    @app.exception_handler(HubError)
    async def handle_hub_error(request: Request, exc: HubError):
        status = _HUB_STATUS.get(type(exc), 409 if exc.code != "hub_error" else 500)
        return _envelope(status, exc.code, str(exc))

    @app.exception_handler(Exception)
    async def handle_internal(request: Request, exc: Exception):
        return _envelope(500, "internal", f"{type(exc).__name__}: {exc}")

    def resolve_language(body: dict, text: str) -> str:
        language = body.get("language")
        if language is None:
            return langid.detect(
                text,
                lexicons,
                devanagari_threshold=config.devanagari_threshold,
                codemix_threshold=config.codemix_threshold,
            ).language
        if language not in LANGUAGES:
            raise _ApiError(422, "validation", f"language must be one of {list(LANGUAGES)}")
        return language

    def score_one(text: str, language: str, record: bool) -> dict:
        start = time.perf_counter()
        result = hub.score(text, language, record=record)
        result["latency_ms"] = round((time.perf_counter() - start) * 1000.0, 3)
        return result

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok", "models": hub.registry.languages()}

    @app.post("/api/v1/score")
    async def score(request: Request):
        body = await _json_body(request)
        text = _validate_text(body.get("text"), config.max_text_length)
        language = resolve_language(body, text)
        return score_one(text, language, _parse_record_flag(request))

    @app.post("/api/v1/page/score")
    async def page_score(request: Request):
        body = await _json_body(request)
        comments = body.get("comments")
        if not isinstance(comments, list) or not comments:
            raise _ApiError(422, "validation", "field 'comments' must be a non-empty list")
        if len(comments) > config.max_page_comments:
            raise _ApiError(
                422, "validation", f"page exceeds {config.max_page_comments} comments"
            )
        record = request.query_params.get("record", "false").lower() in ("true", "1", "yes")
        results = []
        for comment in comments:
            text = _validate_text(comment, config.max_text_length)
            language = resolve_language({}, text)
            results.append(score_one(text, language, record))
        total = len(results)
        counts = {label: 0 for label in LABELS}
        for result in results:
            counts[result["label"]] += 1
        return {
            "total": total,
            "percentages": {label: 100.0 * counts[label] / total for label in LABELS},
            "results": results,
        }

    @app.post("/api/v1/check")
    async def check(request: Request):
        body = await _json_body(request)
        text = _validate_text(body.get("text"), config.max_text_length)
        language = resolve_language(body, text)
        result = score_one(text, language, record=False)
        return {
            "allow": result["label"] == "neither",
            "label": result["label"],
            "probabilities": result["probabilities"],
            "language": result["language"],
            "model_version": result["model_version"],
        }

    @app.get("/api/v1/review")
    async def review(request: Request):
        language = request.query_params.get("language") or None
        if language is not None and language not in LANGUAGES:
            raise _ApiError(422, "validation", f"language must be one of {list(LANGUAGES)}")
        raw_limit = request.query_params.get("limit")
        limit = None
        if raw_limit:
            try:
                limit = int(raw_limit)
            except ValueError as exc:
                raise _ApiError(422, "validation", "limit must be an integer") from exc
            if limit < 0:
                raise _ApiError(422, "validation", "limit must be >= 0")
        items = hub.list_review_queue(language=language, limit=limit)
        return {"items": [_record_json(r) for r in items]}

    @app.post("/api/v1/feedback/{record_id}/resolve")
    async def resolve(record_id: str, request: Request):
        body = await _json_body(request)
        verdict = body.get("verdict")
        label = body.get("label")
        try:
            record = hub.resolve(record_id, verdict, label)
        except ValueError as exc:
            raise _ApiError(422, "validation", str(exc)) from exc
        return _record_json(record)

    @app.post("/api/v1/retrain")
    async def retrain(request: Request):
        body = await _json_body(request)
        language = body.get("language")
        if language not in LANGUAGES:
            raise _ApiError(422, "validation", f"language must be one of {list(LANGUAGES)}")
        version = hub.retrain(language)
        return {"language": language, "version": version}

    @app.get("/api/v1/models")
    async def models():
        return {"models": hub.registry.languages()}

    if config.static_dir and Path(config.static_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="static")

    return app


def app_factory() -> FastAPI:
    """Uvicorn entry point: ``uvicorn --factory hatewatch.service:app_factory``."""
    return create_app(ServiceConfig.from_env())
