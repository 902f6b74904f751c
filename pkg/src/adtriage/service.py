"""HTTP review service backing the analyst console.

All numbers served are recomputed from the persisted artifacts and the
label journal on each request; the journal file is the single source of
truth, with writes serialized behind a lock. Retrain re-executes the topic
and spread stages (both content-cached, so only what the new labels touch
actually recomputes) and runs exclusively: a second concurrent retrain gets
a busy response instead of queueing.
"""

from __future__ import annotations

import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import features, labeling, pipeline, topics
from .corpus import read_listings_jsonl
from .pipeline import (
    FEATURES_FILE,
    FILTERED_FILE,
    LISTINGS_FILE,
    RAW_TEXT_FILE,
    RESULTS_FILE,
    SAMPLE_FILE,
    THETA_FILE,
    PipelineConfig,
    StageError,
    read_raw_text_jsonl,
    read_results_csv,
)

PAGE_SIZE = 20


class LabelRequest(BaseModel):
    listing_id: str
    expert_id: str
    verdict: str
    stage: str = "initial"


class VerifyRequest(BaseModel):
    listing_id: str
    expert_id: str
    confirmed: bool


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


class ServiceState:
    """Artifact access for request handlers.

    Immutable artifacts (listings, features, sample) load once; results and
    thetas reload after retrain; the journal is re-read on every use.
    """

    def __init__(self, config: PipelineConfig):
        self.cfg = config
        out = Path(config.out_dir)
        for required in (LISTINGS_FILE, RAW_TEXT_FILE, FEATURES_FILE, FILTERED_FILE, SAMPLE_FILE):
            if not (out / required).exists():
                raise StageError(
                    "serve", f"missing artifact {required}; run the pipeline through 'filter' first"
                )
        self.out = out
        self.listings = {l.id: l for l in read_listings_jsonl(out / LISTINGS_FILE)}
        self.raw_text = read_raw_text_jsonl(out / RAW_TEXT_FILE)
        self.features = {v.listing_id: v for v in features.read_feature_csv(out / FEATURES_FILE)}
        self.filtered_ids = (out / FILTERED_FILE).read_text(encoding="utf-8").split()
        self.sample_ids = (out / SAMPLE_FILE).read_text(encoding="utf-8").split()
        self.journal_lock = threading.Lock()
        self.retrain_lock = threading.Lock()
        self._results_cache: Optional[list[pipeline.ResultRow]] = None
        self._theta_cache: Optional[tuple[list[str], object]] = None

    def journal(self) -> list[labeling.ExpertLabel]:
        return labeling.read_journal(self.cfg.journal())

    def append(self, label: labeling.ExpertLabel) -> None:
        with self.journal_lock:
            labeling.append_label(self.cfg.journal(), label)

    def results(self) -> list[pipeline.ResultRow]:
        if self._results_cache is None:
            path = self.out / RESULTS_FILE
            self._results_cache = read_results_csv(path) if path.exists() else []
        return self._results_cache

    def thetas(self) -> tuple[list[str], object]:
        if self._theta_cache is None:
            path = self.out / THETA_FILE
            if path.exists():
                self._theta_cache = topics.read_theta_csv(path)
            else:
                self._theta_cache = ([], None)
        return self._theta_cache

    def invalidate(self) -> None:
        self._results_cache = None
        self._theta_cache = None


def create_app(config: PipelineConfig, static_dir: str | Path | None = None) -> FastAPI:
    state = ServiceState(config)
    app = FastAPI(title="ad triage review service")
    app.state.service = state

    @app.exception_handler(HTTPException)
    async def http_error(request: Request, exc: HTTPException):
        detail = exc.detail
        if not (isinstance(detail, dict) and "code" in detail and "message" in detail):
            detail = {"code": "error", "message": str(detail)}
        return JSONResponse(status_code=exc.status_code, content=detail)

    @app.exception_handler(RequestValidationError)
    async def validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"code": "invalid_request", "message": str(exc.errors())},
        )

    def queue_item(listing_id: str, my_verdict: Optional[str]) -> dict:
        raw = state.raw_text.get(listing_id, {})
        vec = state.features.get(listing_id)
        badges = dict(zip(features.FEATURE_NAMES, vec.bits())) if vec else {}
        return {
            "listing_id": listing_id,
            "title": raw.get("title", ""),
            "body": raw.get("body", ""),
            "badges": badges,
            "my_verdict": my_verdict,
        }

    @app.get("/api/queue")
    def get_queue(expert: str, page: int = 1):
        if not expert:
            raise _error(400, "invalid_request", "expert query parameter is required")
        if page < 1:
            raise _error(400, "invalid_request", "page starts at 1")
        view = labeling.journal_view(state.journal())
        pending = [i for i in state.sample_ids if (i, expert, "initial") not in view]
        start = (page - 1) * PAGE_SIZE
        items = [queue_item(i, None) for i in pending[start : start + PAGE_SIZE]]
        return {
            "items": items,
            "page": page,
            "page_size": PAGE_SIZE,
            "remaining": len(pending),
            "exhausted": len(pending) == 0,
        }

    @app.post("/api/labels")
    def post_label(body: LabelRequest):
        if body.verdict not in labeling.VERDICTS:
            raise _error(400, "invalid_verdict", f"verdict must be one of {labeling.VERDICTS}")
        if body.stage not in labeling.STAGES:
            raise _error(400, "invalid_stage", f"stage must be one of {labeling.STAGES}")
        if not body.expert_id.strip():
            raise _error(400, "invalid_expert", "expert_id must be nonempty")
        if body.listing_id not in state.listings:
            raise _error(404, "unknown_listing", f"no listing with id {body.listing_id!r}")
        label = labeling.ExpertLabel(
            listing_id=body.listing_id,
            expert_id=body.expert_id,
            verdict=body.verdict,
            stage=body.stage,
            at=datetime.now(timezone.utc),
        )
        state.append(label)
        return {"ok": True, "recorded": body.model_dump()}

    @app.get("/api/candidates")
    def get_candidates():
        verification = labeling.verification_status(state.journal())
        rows = [r for r in state.results() if not r.seeded and r.hard_label == "positive"]
        rows.sort(key=lambda r: (-r.score_pos, r.listing_id))
        items = []
        for row in rows:
            verdicts = verification.get(row.listing_id, {})
            if any(verdicts.values()):
                status = "confirmed"
            elif verdicts:
                status = "rejected"
            else:
                status = "pending"
            total = row.score_pos + row.score_neg
            items.append(
                {
                    "listing_id": row.listing_id,
                    "score": row.score_pos / total if total > 0 else 0.0,
                    "seeded": row.seeded,
                    "status": status,
                    "verdicts": verdicts,
                }
            )
        return {"items": items, "count": len(items)}

    @app.post("/api/verify")
    def post_verify(body: VerifyRequest):
        if not body.expert_id.strip():
            raise _error(400, "invalid_expert", "expert_id must be nonempty")
        if body.listing_id not in state.listings:
            raise _error(404, "unknown_listing", f"no listing with id {body.listing_id!r}")
        label = labeling.ExpertLabel(
            listing_id=body.listing_id,
            expert_id=body.expert_id,
            verdict="positive" if body.confirmed else "negative",
            stage="verification",
            at=datetime.now(timezone.utc),
        )
        state.append(label)
        return {"ok": True, "recorded": body.model_dump()}

    @app.get("/api/stats")
    def get_stats():
        return pipeline.compute_stats(state.cfg)

    @app.post("/api/retrain")
    def post_retrain():
        if not state.retrain_lock.acquire(blocking=False):
            raise _error(409, "busy", "a retrain is already running")
        try:
            runner = pipeline.Pipeline(state.cfg)
            runner.topics()
            runner.spread()
            state.invalidate()
            stats = pipeline.compute_stats(state.cfg)
            return {"ok": True, "results": stats["results"]}
        except StageError as exc:
            raise _error(500, "stage_error", str(exc)) from exc
        finally:
            state.retrain_lock.release()

    @app.get("/api/listing/{listing_id}")
    def get_listing(listing_id: str):
        listing = state.listings.get(listing_id)
        if listing is None:
            raise _error(404, "unknown_listing", f"no listing with id {listing_id!r}")
        raw = state.raw_text.get(listing_id, {})
        vec = state.features.get(listing_id)
        theta_ids, theta = state.thetas()
        theta_row = None
        if theta is not None and listing_id in theta_ids:
            theta_row = [float(v) for v in theta[theta_ids.index(listing_id)]]
        return {
            "listing_id": listing_id,
            "title": raw.get("title", ""),
            "body": raw.get("body", ""),
            "posted_at": raw.get("posted_at", ""),
            "region": listing.region,
            "phones": list(listing.phones),
            "age": listing.age,
            "weight_lbs": listing.weight_lbs,
            "badges": dict(zip(features.FEATURE_NAMES, vec.bits())) if vec else {},
            "theta": theta_row,
        }

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="console")

    return app


def serve(config: PipelineConfig, port: int = 8000, host: str = "127.0.0.1",
          static_dir: str | Path | None = None) -> None:
    import uvicorn

    uvicorn.run(create_app(config, static_dir=static_dir), host=host, port=port)
