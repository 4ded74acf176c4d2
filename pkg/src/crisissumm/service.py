"""HTTP/JSON facade over annotation sessions and evaluation reports.

File layout under the data directory:

    datasets/<name>/dataset.json      normalized corpus
    datasets/<name>/assignment.json   topic assignment (optional, for reports)
    datasets/<name>/candidates.json   annotator shortlists
    embeddings.txt                    word vectors (optional, for diversity)
    events.jsonl                      append-only mutation log
    snapshots/<session_id>.json       convenience session snapshots

Every mutation is appended to the event log before it is acknowledged; the
log replays to an identical store on restart. All error bodies are
{"code": ..., "message": ...}.
"""

from __future__ import annotations

import hmac
import json
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import Depends, FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from .annotation import (
    AnnotationError,
    BudgetExceeded,
    DuplicateSession,
    Mode,
    Rating,
    RatingError,
    SessionFinalized,
    SessionOpen,
    SessionStore,
    UnderBudget,
    UnknownSession,
    UnknownTweet,
)
from .corpus import Dataset
from .embeddings import load_embeddings
from .ranker import CandidateSet, load_candidates
from .reports import dataset_report
from .taxonomy import TopicAssignment, TopicLabel

logger = logging.getLogger(__name__)

class NotFound(AnnotationError):
    code = "not_found"


class AuthError(Exception):
    pass


_STATUS = {
    NotFound: 404,
    DuplicateSession: 409,
    UnknownSession: 404,
    SessionFinalized: 409,
    SessionOpen: 409,
    BudgetExceeded: 409,
    UnderBudget: 409,
    UnknownTweet: 400,
    RatingError: 400,
    AnnotationError: 400,
}


@dataclass
class ApiConfig:
    data_dir: Path
    host: str = "127.0.0.1"
    port: int = 8787
    auth_token: str | None = None
    allow_short: bool = False

    def __post_init__(self):
        self.data_dir = Path(self.data_dir)


@dataclass
class DatasetEntry:
    dataset: Dataset
    candidates: list[CandidateSet]
    assignment: TopicAssignment | None


class AppState:
    def __init__(self, config: ApiConfig):
        self.config = config
        self.lock = threading.Lock()
        self.registry: dict[str, DatasetEntry] = {}
        self._load_registry()
        self.table = None
        emb = config.data_dir / "embeddings.txt"
        if emb.exists():
            self.table = load_embeddings(emb)
        log_path = config.data_dir / "events.jsonl"
        # raises EventLogError (naming the line) on a corrupt log: the
        # service refuses to start rather than serve from damaged state
        self.store = SessionStore.replay(log_path, allow_short=config.allow_short)
        (config.data_dir / "snapshots").mkdir(exist_ok=True)

    def _load_registry(self) -> None:
        root = self.config.data_dir / "datasets"
        if not root.is_dir():
            raise FileNotFoundError(f"no datasets directory under {self.config.data_dir}")
        for ds_dir in sorted(root.iterdir()):
            ds_file = ds_dir / "dataset.json"
            cand_file = ds_dir / "candidates.json"
            if not (ds_file.exists() and cand_file.exists()):
                logger.warning("registry: skipping %s (dataset.json/candidates.json missing)",
                               ds_dir.name)
                continue
            dataset = Dataset.load(ds_file)
            if dataset.name in self.registry:
                raise ValueError(f"duplicate dataset name {dataset.name!r} in registry")
            asg_file = ds_dir / "assignment.json"
            assignment = TopicAssignment.load(asg_file) if asg_file.exists() else None
            self.registry[dataset.name] = DatasetEntry(
                dataset=dataset,
                candidates=load_candidates(cand_file),
                assignment=assignment,
            )

    def entry(self, name: str) -> DatasetEntry:
        if name not in self.registry:
            raise NotFound(f"no dataset {name!r}")
        return self.registry[name]

    def write_snapshot(self, session_id: str) -> None:
        snap = self.store.get(session_id).snapshot()
        path = self.config.data_dir / "snapshots" / f"{session_id}.json"
        with open(path, "w", encoding="utf-8") as f:
            json.dump(snap, f, ensure_ascii=False, indent=2, sort_keys=True)
            f.write("\n")


class SessionCreate(BaseModel):
    dataset: str
    annotator_id: str
    mode: str = Mode.GROUND_TRUTH.value
    budget: int | None = None
    session_id: str | None = None
    shuffle_seed: int | None = None


class ToggleBody(BaseModel):
    topic: str
    tweet_id: str


class RatingBody(BaseModel):
    rater_id: str
    coverage: float
    relevance: float
    diversity: float
    qa_score: float | None = None


def _session_view(state: AppState, session_id: str) -> dict:
    sess = state.store.get(session_id)
    view = sess.snapshot()
    entry = state.registry.get(sess.dataset)
    texts = {}
    if entry is not None:
        by_id = entry.dataset.by_id()
        for ids in sess.candidates.values():
            for tid in ids:
                tw = by_id.get(tid)
                if tw is not None:
                    texts[tid] = tw.raw_text
    view["texts"] = texts
    return view


def create_app(config: ApiConfig) -> FastAPI:
    state = AppState(config)
    app = FastAPI(title="crisissumm annotation service")
    app.state.crisissumm = state

    @app.exception_handler(AnnotationError)
    async def _annotation_error(request: Request, exc: AnnotationError):
        status = 500
        for cls, code in _STATUS.items():
            if isinstance(exc, cls):
                status = code
                break
        return JSONResponse(status_code=status,
                            content={"code": exc.code, "message": str(exc)})

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400,
                            content={"code": "bad_request", "message": str(exc)})

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422,
                            content={"code": "validation_error", "message": str(exc)})

    def auth(request: Request) -> None:
        if config.auth_token is None:
            return
        header = request.headers.get("authorization", "")
        expected = f"Bearer {config.auth_token}"
        if not hmac.compare_digest(header, expected):
            raise AuthError()

    @app.exception_handler(AuthError)
    async def _auth_error(request: Request, exc: AuthError):
        return JSONResponse(status_code=401,
                            content={"code": "unauthorized", "message": "bad or missing bearer token"})

    @app.get("/datasets", dependencies=[Depends(auth)])
    def list_datasets():
        return [
            {"name": name, "tweets": len(e.dataset.tweets),
             "summary_budget": e.dataset.summary_budget,
             "topics": [c.topic.value for c in e.candidates]}
            for name, e in sorted(state.registry.items())
        ]

    @app.get("/datasets/{name}/topics", dependencies=[Depends(auth)])
    def dataset_topics(name: str):
        entry = state.entry(name)
        return [
            {"topic": c.topic.value, "source_size": c.source_size,
             "shortlist": len(c.ranked_ids)}
            for c in entry.candidates
        ]

    @app.get("/datasets/{name}/candidates/{topic}", dependencies=[Depends(auth)])
    def dataset_candidates(name: str, topic: str):
        entry = state.entry(name)
        label = TopicLabel(topic)
        for c in entry.candidates:
            if c.topic is label:
                by_id = entry.dataset.by_id()
                return {"topic": c.topic.value, "source_size": c.source_size,
                        "tweets": [{"id": tid, "text": by_id[tid].raw_text}
                                   for tid in c.ranked_ids]}
        raise NotFound(f"no candidates for topic {topic!r} in {name!r}")

    @app.post("/sessions", dependencies=[Depends(auth)])
    def open_session(body: SessionCreate):
        entry = state.entry(body.dataset)
        budget = (body.budget if body.budget is not None
                  else entry.dataset.summary_budget)
        with state.lock:
            sess = state.store.open_session(
                dataset=body.dataset,
                annotator_id=body.annotator_id,
                mode=Mode(body.mode),
                candidates=entry.candidates,
                budget=budget,
                session_id=body.session_id,
                shuffle_seed=body.shuffle_seed,
            )
            state.write_snapshot(sess.session_id)
        return _session_view(state, sess.session_id)

    @app.get("/sessions/{session_id}", dependencies=[Depends(auth)])
    def get_session(session_id: str):
        return _session_view(state, session_id)

    @app.post("/sessions/{session_id}/toggle", dependencies=[Depends(auth)])
    def toggle(session_id: str, body: ToggleBody):
        with state.lock:
            state.store.toggle_selection(session_id, TopicLabel(body.topic), body.tweet_id)
            state.write_snapshot(session_id)
        return _session_view(state, session_id)

    @app.post("/sessions/{session_id}/finalize", dependencies=[Depends(auth)])
    def finalize(session_id: str):
        with state.lock:
            if session_id in state.store.records:
                # idempotent: re-finalizing returns the stored record
                return {"record": state.store.records[session_id].to_dict(),
                        "replay": True}
            record = state.store.finalize(session_id)
            state.write_snapshot(session_id)
        return {"record": record.to_dict(), "replay": False}

    @app.post("/sessions/{session_id}/ratings", dependencies=[Depends(auth)])
    def add_rating(session_id: str, body: RatingBody):
        rating = Rating(rater_id=body.rater_id, session_id=session_id,
                        coverage=body.coverage, relevance=body.relevance,
                        diversity=body.diversity, qa_score=body.qa_score)
        with state.lock:
            state.store.add_rating(rating)
        return {"ok": True, "count": len(state.store.ratings[session_id])}

    @app.get("/sessions/{session_id}/export", dependencies=[Depends(auth)])
    def export(session_id: str, format: str = Query("json")):
        record = state.store.record(session_id)
        if format == "json":
            return record.to_dict()
        if format == "text":
            sess = state.store.get(session_id)
            entry = state.registry.get(sess.dataset)
            by_id = entry.dataset.by_id() if entry else {}
            # one tweet per line, so embedded newlines must be flattened
            lines = [(by_id[tid].raw_text.replace("\n", " ") if tid in by_id else tid)
                     for tid in record.tweet_ids]
            return PlainTextResponse("\n".join(lines) + "\n")
        raise ValueError(f"unknown export format {format!r}")

    @app.get("/reports/{name}", dependencies=[Depends(auth)])
    def report(name: str, include_rouge: bool = Query(False), seed: int = Query(0)):
        entry = state.entry(name)
        return dataset_report(
            entry.dataset,
            assignment=entry.assignment,
            candidates=entry.candidates,
            store=state.store,
            table=state.table,
            include_rouge=include_rouge,
            seed=seed,
        )

    return app


def serve(config: ApiConfig) -> None:
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
