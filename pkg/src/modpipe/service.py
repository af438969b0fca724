"""HTTP moderation service: /v1/moderate, /v1/feedback, /v1/health.

The app holds one immutable pipeline snapshot; rule reloads build a fresh
compiled set and swap the whole pipeline atomically, so in-flight requests
always see a consistent (rules, scorer, config) triple. Verdicts are cached
briefly (bounded, TTL) purely to let feedback submissions reference them.
"""

from __future__ import annotations

import logging
import threading
import time
import uuid
from collections import OrderedDict
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware

from . import feedback as feedback_mod
from .config import ServiceConfig
from .decision import Action, FailPolicy, Layer, ModerationPipeline, PipelineConfig, Verdict
from .fixtures import builtin_reference_scorer
from .normalizer import normalize
from .rules import compile_rules_file
from .schemas import (
    MAX_TEXT_CHARS,
    FeedbackRequest,
    FeedbackResponse,
    HealthResponse,
    ModerateRequest,
    ModerateResponse,
    ReloadRulesRequest,
    ReloadRulesResponse,
)
from .scorer import load_exported_model

logger = logging.getLogger(__name__)


class VerdictCache:
    """Bounded TTL cache linking verdict ids to (raw text, verdict)."""

    def __init__(self, ttl: float, capacity: int):
        self._ttl = ttl
        self._capacity = capacity
        self._items: OrderedDict[str, tuple[float, str, Verdict]] = OrderedDict()
        self._lock = threading.Lock()

    def put(self, text: str, verdict: Verdict) -> str:
        verdict_id = uuid.uuid4().hex
        now = time.monotonic()
        with self._lock:
            self._items[verdict_id] = (now + self._ttl, text, verdict)
            while len(self._items) > self._capacity:
                self._items.popitem(last=False)
        return verdict_id

    def get(self, verdict_id: str) -> tuple[str, Verdict] | None:
        now = time.monotonic()
        with self._lock:
            entry = self._items.get(verdict_id)
            if entry is None:
                return None
            expires, text, verdict = entry
            if expires < now:
                del self._items[verdict_id]
                return None
            return text, verdict


def build_pipeline(config: ServiceConfig) -> ModerationPipeline:
    ruleset = compile_rules_file(config.rules_path)
    if config.model_path is not None:
        scorer = load_exported_model(config.model_path)
    else:
        scorer = builtin_reference_scorer()
    return ModerationPipeline(
        config=PipelineConfig(allow_threshold=config.threshold, fail_policy=config.fail_policy),
        ruleset=ruleset,
        scorer=scorer,
    )


class ModerationService:
    """Shared state behind the FastAPI endpoints."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.pipeline = build_pipeline(config)
        self.store = feedback_mod.FeedbackStore(config.feedback_store_path)
        self.cache = VerdictCache(config.verdict_cache_ttl, config.verdict_cache_capacity)
        self.ready = True

    def reload_rules(self, rules_path: str | Path | None = None) -> str:
        """Compile a fresh rule set and swap the pipeline atomically."""
        path = Path(rules_path) if rules_path is not None else self.config.rules_path
        ruleset = compile_rules_file(path)
        self.pipeline = ModerationPipeline(
            config=self.pipeline.config, ruleset=ruleset, scorer=self.pipeline.scorer
        )
        logger.info("rules reloaded from %s (version %s)", path, ruleset.version)
        return ruleset.version


def _verdict_payload_to_verdict(req: FeedbackRequest) -> tuple[str, Verdict]:
    payload = req.verdict
    assert payload is not None
    text = req.text if req.text is not None else ""
    decided_at = payload.decided_at or datetime.now(timezone.utc)
    if decided_at.tzinfo is None:
        decided_at = decided_at.replace(tzinfo=timezone.utc)
    verdict = Verdict(
        action=Action(payload.action),
        score=payload.hate_score,
        layer=Layer(payload.layer),
        rule_hits=tuple(payload.rule_hits),
        normalized_text=payload.normalized_text if payload.normalized_text is not None else normalize(text),
        scorer_version=payload.scorer_version,
        decided_at=decided_at,
    )
    return text, verdict


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    service = ModerationService(config or ServiceConfig())
    app = FastAPI(title="modpipe moderation service", version="1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.moderation = service

    @app.post("/v1/moderate", response_model=ModerateResponse)
    def moderate(req: ModerateRequest) -> ModerateResponse:
        if not req.text.strip():
            raise HTTPException(status_code=400, detail="text must not be empty")
        if len(req.text) > MAX_TEXT_CHARS:
            raise HTTPException(
                status_code=400, detail=f"text exceeds {MAX_TEXT_CHARS} characters"
            )
        pipeline = service.pipeline
        verdict = pipeline.decide(req.text)
        if verdict.error is not None and pipeline.config.fail_policy is FailPolicy.FAIL_CLOSED_BLOCK:
            raise HTTPException(status_code=503, detail="scorer unavailable")
        verdict_id = service.cache.put(req.text, verdict)
        return ModerateResponse(
            action=verdict.action.value,
            hate_score=verdict.score,
            layer=verdict.layer.value,
            rule_hits=list(verdict.rule_hits),
            scorer_version=verdict.scorer_version,
            verdict_id=verdict_id,
        )

    @app.post("/v1/feedback", response_model=FeedbackResponse, status_code=201)
    def submit_feedback(req: FeedbackRequest) -> FeedbackResponse:
        if req.reviewer_label not in feedback_mod.REVIEWER_LABELS:
            raise HTTPException(
                status_code=400,
                detail=f"reviewer_label must be one of {list(feedback_mod.REVIEWER_LABELS)}",
            )
        if req.verdict_id is not None:
            cached = service.cache.get(req.verdict_id)
            if cached is None and req.verdict is None:
                raise HTTPException(status_code=404, detail="unknown verdict_id")
        else:
            cached = None
        if cached is not None:
            text, verdict = cached
        elif req.verdict is not None:
            text, verdict = _verdict_payload_to_verdict(req)
        else:
            raise HTTPException(status_code=400, detail="supply verdict_id or an inline verdict")
        record = feedback_mod.submit_feedback(
            service.store, text, verdict, req.reviewer_label, req.reviewer_id
        )
        return FeedbackResponse(feedback_id=record.id)

    @app.get("/v1/health", response_model=HealthResponse)
    def health(request: Request):
        if not service.ready:
            raise HTTPException(status_code=503, detail="service not ready")
        pipeline = service.pipeline
        return HealthResponse(
            status="ok",
            rules_version=pipeline.rules_version,
            scorer_version=pipeline.scorer_version,
        )

    @app.post("/v1/admin/reload_rules", response_model=ReloadRulesResponse)
    def reload_rules(req: ReloadRulesRequest) -> ReloadRulesResponse:
        try:
            version = service.reload_rules(req.rules_path)
        except Exception as exc:  # bad file: keep serving the old rules
            raise HTTPException(status_code=400, detail=f"reload failed: {exc}") from exc
        return ReloadRulesResponse(rules_version=version)

    return app
