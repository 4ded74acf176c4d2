"""Human annotation sessions: candidate presentation, selection bookkeeping,
quality-assessment sampling and meta-annotator ratings.

State is event-sourced. Every mutation first appends one JSONL event
({ts, session_id, action, payload}) to the log, then applies it; replaying
any prefix of the log reconstructs a valid store. Candidate order is
shuffled per session with a recorded seed so that ranking information never
leaks to annotators.
"""

from __future__ import annotations

import json
import math
import random
import time
import uuid
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .ranker import CandidateSet
from .summarizers import SummaryRecord
from .taxonomy import TopicAssignment, TopicLabel

QA_SAMPLE_RATE = 0.02
QA_PASS_THRESHOLD = 7.0  # strictly greater passes


class AnnotationError(Exception):
    """Base for session domain errors; `code` keys the service error body."""

    code = "annotation_error"


class DuplicateSession(AnnotationError):
    code = "duplicate_session"


class UnknownSession(AnnotationError):
    code = "unknown_session"


class SessionFinalized(AnnotationError):
    code = "session_finalized"


class SessionOpen(AnnotationError):
    code = "session_open"


class BudgetExceeded(AnnotationError):
    code = "budget_exceeded"

    def __init__(self, remaining: int):
        super().__init__(f"selection rejected: budget reached, {remaining} remaining")
        self.remaining = remaining


class UnknownTweet(AnnotationError):
    code = "unknown_tweet"


class UnderBudget(AnnotationError):
    code = "under_budget"

    def __init__(self, shortfall: int):
        super().__init__(f"{shortfall} below budget")
        self.shortfall = shortfall


class RatingError(AnnotationError):
    code = "bad_rating"


class EventLogError(ValueError):
    """Corrupt event log; refuses replay and names the offending line."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"event log line {line_no}: {reason}")
        self.line_no = line_no


class Mode(str, Enum):
    GROUND_TRUTH = "GroundTruth"
    QUALITY_ASSESSMENT = "QualityAssessment"


@dataclass
class AnnotationSession:
    session_id: str
    dataset: str
    annotator_id: str
    mode: Mode
    budget: int
    shuffle_seed: int
    candidates: dict[TopicLabel, tuple[str, ...]]  # per-topic, shuffled order
    selections: dict[TopicLabel, list[str]] = field(default_factory=dict)
    order: list[tuple[TopicLabel, str]] = field(default_factory=list)
    finalized: bool = False

    @property
    def selected_count(self) -> int:
        return len(self.order)

    @property
    def remaining(self) -> int:
        return self.budget - self.selected_count

    @property
    def state(self) -> str:
        return "Finalized" if self.finalized else "Open"

    def snapshot(self) -> dict:
        """Canonical JSON-ready view; byte-stable under replay."""
        return {
            "session_id": self.session_id,
            "dataset": self.dataset,
            "annotator_id": self.annotator_id,
            "mode": self.mode.value,
            "budget": self.budget,
            "remaining": self.remaining,
            "state": self.state,
            "shuffle_seed": self.shuffle_seed,
            "candidates": {t.value: list(ids) for t, ids in self.candidates.items()},
            "selections": {t.value: list(ids) for t, ids in self.selections.items() if ids},
            "order": [[t.value, tid] for t, tid in self.order],
        }


@dataclass(frozen=True)
class QualitySample:
    by_topic: dict[TopicLabel, tuple[str, ...]]
    seed: int

    def to_dict(self) -> dict:
        return {"seed": self.seed,
                "topics": {t.value: list(ids) for t, ids in self.by_topic.items()}}


@dataclass(frozen=True)
class Rating:
    rater_id: str
    session_id: str
    coverage: float
    relevance: float
    diversity: float
    qa_score: float | None = None

    def __post_init__(self):
        for name in ("coverage", "relevance", "diversity"):
            v = getattr(self, name)
            if not (1.0 <= v <= 5.0):
                raise RatingError(f"{name} must be in [1, 5], got {v}")
        if self.qa_score is not None and not (1.0 <= self.qa_score <= 10.0):
            raise RatingError(f"qa_score must be in [1, 10], got {self.qa_score}")

    def to_dict(self) -> dict:
        d = {"rater_id": self.rater_id, "session_id": self.session_id,
             "coverage": self.coverage, "relevance": self.relevance,
             "diversity": self.diversity}
        if self.qa_score is not None:
            d["qa_score"] = self.qa_score
        return d


@dataclass(frozen=True)
class QaVerdict:
    annotator_id: str
    mean_qa: float
    passed: bool

    def to_dict(self) -> dict:
        return {"annotator_id": self.annotator_id, "mean_qa": self.mean_qa,
                "passed": self.passed}


def _shuffled(ids, seed: int, topic: TopicLabel) -> tuple[str, ...]:
    rng = random.Random(f"{seed}:{topic.value}")
    out = list(ids)
    rng.shuffle(out)
    return tuple(out)


class SessionStore:
    """All sessions, ratings and finalized records, backed by one event log.

    Mutations append to the log before touching in-memory state; a store
    built by replaying the log is identical to the one that wrote it.
    """

    def __init__(self, log_path: str | Path | None = None, allow_short: bool = False):
        self.log_path = Path(log_path) if log_path is not None else None
        self.allow_short = allow_short
        self.sessions: dict[str, AnnotationSession] = {}
        self.records: dict[str, SummaryRecord] = {}
        self.ratings: dict[str, list[Rating]] = {}
        self._open_keys: set[tuple[str, str]] = set()

    # -- event plumbing ----------------------------------------------------

    def _append(self, event: dict) -> None:
        if self.log_path is None:
            return
        line = json.dumps(event, sort_keys=True, ensure_ascii=False)
        with open(self.log_path, "a", encoding="utf-8") as f:
            f.write(line + "\n")
            f.flush()

    def _emit(self, session_id: str, action: str, payload: dict) -> None:
        self._append({"ts": time.time(), "session_id": session_id,
                      "action": action, "payload": payload})

    @classmethod
    def replay(cls, log_path: str | Path, allow_short: bool = False,
               tolerate_torn_tail: bool = True) -> "SessionStore":
        """Rebuild a store from its event log.

        A malformed final line is treated as a torn write from a crash and
        ignored; any other malformed or inapplicable event refuses the whole
        log, naming the line.
        """
        store = cls(log_path=None, allow_short=allow_short)
        path = Path(log_path)
        if path.exists():
            lines = path.read_text(encoding="utf-8").splitlines()
            for line_no, line in enumerate(lines, 1):
                if not line.strip():
                    continue
                try:
                    event = json.loads(line)
                except json.JSONDecodeError as e:
                    if tolerate_torn_tail and line_no == len(lines):
                        break  # torn final write; the mutation was never acked
                    raise EventLogError(line_no, f"invalid JSON ({e.msg})") from e
                try:
                    store._apply(event)
                except (AnnotationError, KeyError, ValueError) as e:
                    raise EventLogError(line_no, f"inapplicable event: {e}") from e
        store.log_path = path
        return store

    def _apply(self, event: dict) -> None:
        action = event["action"]
        sid = event["session_id"]
        payload = event["payload"]
        if action == "open":
            self._apply_open(sid, payload)
        elif action == "toggle":
            self._apply_toggle(sid, TopicLabel(payload["topic"]), payload["tweet_id"])
        elif action == "finalize":
            self._apply_finalize(sid)
        elif action == "rate":
            self._apply_rate(sid, Rating(session_id=sid, **{
                k: payload[k] for k in ("rater_id", "coverage", "relevance", "diversity")
            }, qa_score=payload.get("qa_score")))
        else:
            raise ValueError(f"unknown action {action!r}")

    # -- commands ------------------------------------------------------------

    def open_session(
        self,
        dataset: str,
        annotator_id: str,
        mode: Mode,
        candidates: list[CandidateSet],
        budget: int,
        session_id: str | None = None,
        shuffle_seed: int | None = None,
    ) -> AnnotationSession:
        """Open a session; candidates are re-ordered with a recorded seed."""
        if not candidates:
            raise AnnotationError("no candidate sets")
        if budget < 1:
            raise AnnotationError("budget must be >= 1")
        if (dataset, annotator_id) in self._open_keys:
            raise DuplicateSession(
                f"open session already exists for ({dataset}, {annotator_id})")
        sid = session_id or uuid.uuid4().hex[:12]
        if sid in self.sessions:
            raise DuplicateSession(f"session id {sid} already exists")
        seed = shuffle_seed if shuffle_seed is not None else random.randrange(2**31)
        ordered = {c.topic.value: list(_shuffled(c.ranked_ids, seed, c.topic))
                   for c in candidates}
        payload = {"dataset": dataset, "annotator_id": annotator_id,
                   "mode": mode.value, "budget": budget,
                   "shuffle_seed": seed, "candidates": ordered}
        self._emit(sid, "open", payload)
        return self._apply_open(sid, payload)

    def _apply_open(self, sid: str, payload: dict) -> AnnotationSession:
        if sid in self.sessions:
            raise DuplicateSession(f"session id {sid} already exists")
        key = (payload["dataset"], payload["annotator_id"])
        if key in self._open_keys:
            raise DuplicateSession(f"open session already exists for {key}")
        sess = AnnotationSession(
            session_id=sid,
            dataset=payload["dataset"],
            annotator_id=payload["annotator_id"],
            mode=Mode(payload["mode"]),
            budget=int(payload["budget"]),
            shuffle_seed=int(payload["shuffle_seed"]),
            candidates={TopicLabel(t): tuple(ids)
                        for t, ids in payload["candidates"].items()},
        )
        self.sessions[sid] = sess
        self.ratings.setdefault(sid, [])
        self._open_keys.add(key)
        return sess

    def get(self, session_id: str) -> AnnotationSession:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise UnknownSession(f"no session {session_id!r}") from None

    def toggle_selection(self, session_id: str, topic: TopicLabel,
                         tweet_id: str) -> AnnotationSession:
        """Flip one candidate's membership in the selection basket."""
        sess = self.get(session_id)
        self._check_toggle(sess, topic, tweet_id)
        self._emit(session_id, "toggle", {"topic": topic.value, "tweet_id": tweet_id})
        return self._apply_toggle(session_id, topic, tweet_id)

    def _check_toggle(self, sess: AnnotationSession, topic: TopicLabel,
                      tweet_id: str) -> None:
        if sess.finalized:
            raise SessionFinalized(f"session {sess.session_id} is finalized")
        if tweet_id not in sess.candidates.get(topic, ()):
            raise UnknownTweet(f"tweet {tweet_id!r} is not a candidate in {topic.value}")
        selecting = tweet_id not in sess.selections.get(topic, [])
        if selecting and sess.remaining == 0:
            raise BudgetExceeded(0)

    def _apply_toggle(self, sid: str, topic: TopicLabel,
                      tweet_id: str) -> AnnotationSession:
        sess = self.get(sid)
        self._check_toggle(sess, topic, tweet_id)
        bucket = sess.selections.setdefault(topic, [])
        if tweet_id in bucket:
            bucket.remove(tweet_id)
            sess.order.remove((topic, tweet_id))
        else:
            bucket.append(tweet_id)
            sess.order.append((topic, tweet_id))
        return sess

    def finalize(self, session_id: str) -> SummaryRecord:
        """Close the session and emit its summary record."""
        sess = self.get(session_id)
        self._check_finalize(sess)
        self._emit(session_id, "finalize", {})
        return self._apply_finalize(session_id)

    def _check_finalize(self, sess: AnnotationSession) -> None:
        if sess.finalized:
            raise SessionFinalized(f"session {sess.session_id} already finalized")
        if sess.mode is Mode.GROUND_TRUTH and not self.allow_short:
            if sess.selected_count != sess.budget:
                raise UnderBudget(sess.budget - sess.selected_count)
        elif sess.selected_count == 0:
            raise AnnotationError("finalize requires at least one selection")

    def _apply_finalize(self, sid: str) -> SummaryRecord:
        sess = self.get(sid)
        self._check_finalize(sess)
        sess.finalized = True
        self._open_keys.discard((sess.dataset, sess.annotator_id))
        record = SummaryRecord(
            method=f"human:{sess.annotator_id}",
            dataset=sess.dataset,
            tweet_ids=tuple(tid for _, tid in sess.order),
            budget=sess.budget,
        )
        self.records[sid] = record
        return record

    def add_rating(self, rating: Rating) -> None:
        """Attach a meta-annotator rating to a finalized session."""
        sess = self.get(rating.session_id)
        self._check_rating(sess, rating)
        payload = {k: v for k, v in rating.to_dict().items() if k != "session_id"}
        self._emit(rating.session_id, "rate", payload)
        self._apply_rate(rating.session_id, rating)

    def _check_rating(self, sess: AnnotationSession, rating: Rating) -> None:
        if not sess.finalized:
            raise RatingError("ratings apply to finalized sessions only")
        if rating.qa_score is not None and sess.mode is not Mode.QUALITY_ASSESSMENT:
            raise RatingError("qa_score is only valid for QualityAssessment sessions")

    def _apply_rate(self, sid: str, rating: Rating) -> None:
        sess = self.get(sid)
        self._check_rating(sess, rating)
        self.ratings.setdefault(sid, []).append(rating)

    # -- queries -------------------------------------------------------------

    def record(self, session_id: str) -> SummaryRecord:
        self.get(session_id)
        try:
            return self.records[session_id]
        except KeyError:
            raise SessionOpen(f"session {session_id} is not finalized") from None

    def finalized_sessions(self, dataset: str | None = None) -> list[AnnotationSession]:
        out = [s for s in self.sessions.values() if s.finalized]
        if dataset is not None:
            out = [s for s in out if s.dataset == dataset]
        return sorted(out, key=lambda s: s.session_id)


def sample_size(n: int) -> int:
    """Quality-assessment sample size for a topic of n tweets: 2%, rounded up,
    never below 1."""
    if n < 1:
        raise ValueError("topic size must be >= 1")
    return max(1, math.ceil(QA_SAMPLE_RATE * n))


def qa_sample(assignment: TopicAssignment, seed: int) -> QualitySample:
    """Uniform per-topic sample for the quality-assessment exam;
    deterministic under seed."""
    if not assignment.by_topic:
        raise ValueError("empty assignment")
    rng = random.Random(seed)
    by_topic: dict[TopicLabel, tuple[str, ...]] = {}
    for topic in TopicLabel:
        ids = assignment.by_topic.get(topic, ())
        if not ids:
            continue
        by_topic[topic] = tuple(rng.sample(list(ids), sample_size(len(ids))))
    return QualitySample(by_topic=by_topic, seed=seed)


def qa_verdict(ratings: list[Rating], annotator_id: str = "") -> QaVerdict:
    """Pass/fail on the mean qa_score; strictly above 7 passes."""
    scores = [r.qa_score for r in ratings if r.qa_score is not None]
    if not scores:
        raise ValueError("no qa_score present in ratings")
    mean = sum(scores) / len(scores)
    return QaVerdict(annotator_id=annotator_id, mean_qa=mean,
                     passed=mean > QA_PASS_THRESHOLD)


def aggregate_ratings(ratings: list[Rating]) -> dict[str, float]:
    """Arithmetic mean per factor, reported to 2 decimals."""
    if not ratings:
        raise ValueError("no ratings")
    n = len(ratings)
    return {
        "coverage": round(sum(r.coverage for r in ratings) / n, 2),
        "relevance": round(sum(r.relevance for r in ratings) / n, 2),
        "diversity": round(sum(r.diversity for r in ratings) / n, 2),
    }


def select_annotators(verdicts: list[QaVerdict], k: int = 3) -> list[QaVerdict]:
    """Top-k passing annotators, ranked by mean qa_score (ties by id)."""
    passers = [v for v in verdicts if v.passed]
    return sorted(passers, key=lambda v: (-v.mean_qa, v.annotator_id))[:k]
