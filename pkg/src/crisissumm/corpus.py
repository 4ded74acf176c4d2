"""Tweet corpus ingestion, normalization and the TF-IDF term index.

A corpus moves through two states: as ingested (raw text only) and
normalized (tokens populated, duplicates and retweets removed). Both are
plain immutable-by-convention datasets; every downstream stage consumes
the normalized form.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import textnorm

logger = logging.getLogger(__name__)

RELEVANCE_LABELS = ("high", "medium", "low")

RT_PREFIX_RE = re.compile(r"^\s*rt\b", re.IGNORECASE)


class IngestError(ValueError):
    """A malformed record under strict ingestion; carries the line number."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


@dataclass(frozen=True)
class Tweet:
    id: str
    raw_text: str
    clean_text: str = ""
    tokens: tuple[str, ...] = ()
    topic: str | None = None
    relevance_label: str | None = None
    explanation: str | None = None

    def to_dict(self) -> dict:
        d = {"id": self.id, "raw_text": self.raw_text, "clean_text": self.clean_text,
             "tokens": list(self.tokens)}
        for k in ("topic", "relevance_label", "explanation"):
            v = getattr(self, k)
            if v is not None:
                d[k] = v
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Tweet":
        return cls(
            id=str(d["id"]),
            raw_text=d.get("raw_text", d.get("text", "")),
            clean_text=d.get("clean_text", ""),
            tokens=tuple(d.get("tokens", ())),
            topic=d.get("topic"),
            relevance_label=d.get("relevance_label"),
            explanation=d.get("explanation"),
        )


@dataclass(frozen=True)
class Dataset:
    name: str
    tweets: tuple[Tweet, ...]
    disaster_keywords: frozenset[str] = frozenset()
    summary_budget: int = 40

    def __post_init__(self):
        if self.summary_budget < 1:
            raise ValueError("summary_budget must be >= 1")
        ids = [t.id for t in self.tweets]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate tweet ids in dataset")

    def __len__(self) -> int:
        return len(self.tweets)

    def by_id(self) -> dict[str, Tweet]:
        return {t.id: t for t in self.tweets}

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "summary_budget": self.summary_budget,
            "disaster_keywords": sorted(self.disaster_keywords),
            "tweets": [t.to_dict() for t in self.tweets],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Dataset":
        return cls(
            name=d["name"],
            tweets=tuple(Tweet.from_dict(t) for t in d["tweets"]),
            disaster_keywords=frozenset(d.get("disaster_keywords", ())),
            summary_budget=int(d.get("summary_budget", 40)),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, ensure_ascii=False, indent=2, sort_keys=True)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "Dataset":
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


def _validate_record(rec: dict, line_no: int, seen_ids: set[str]) -> Tweet:
    if not isinstance(rec, dict):
        raise IngestError(line_no, "record is not an object")
    rid = rec.get("id")
    text = rec.get("text")
    if rid is None or str(rid) == "":
        raise IngestError(line_no, "missing id field")
    if text is None or str(text) == "":
        raise IngestError(line_no, "missing text field")
    rid = str(rid)
    if rid in seen_ids:
        raise IngestError(line_no, f"duplicate id {rid!r}")
    label = rec.get("relevance_label")
    if label is not None:
        label = str(label).lower()
        if label not in RELEVANCE_LABELS:
            raise IngestError(line_no, f"bad relevance_label {label!r}")
    explanation = rec.get("explanation")
    return Tweet(id=rid, raw_text=str(text), relevance_label=label,
                 explanation=str(explanation) if explanation is not None else None)


def ingest(
    path,
    format: str = "jsonl",
    strict: bool = False,
    name: str | None = None,
    keywords_path=None,
    summary_budget: int = 40,
) -> Dataset:
    """Load a tweet corpus from a JSONL or CSV file (raw, not yet normalized).

    Malformed records are skipped with a warning naming the line, or raise
    IngestError when strict. The disaster keyword lexicon is read from
    keywords_path (bundled default when None).
    """
    if format not in ("jsonl", "csv"):
        raise ValueError(f"unknown format {format!r}")

    tweets: list[Tweet] = []
    seen: set[str] = set()
    skipped = 0

    def handle(rec, line_no):
        nonlocal skipped
        try:
            tw = _validate_record(rec, line_no, seen)
        except IngestError as e:
            if strict:
                raise
            logger.warning("ingest %s: skipping malformed record at %s", path, e)
            skipped += 1
            return
        seen.add(tw.id)
        tweets.append(tw)

    with open(path, encoding="utf-8") as f:
        if format == "jsonl":
            for line_no, line in enumerate(f, 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as e:
                    if strict:
                        raise IngestError(line_no, f"invalid JSON ({e.msg})") from e
                    logger.warning("ingest %s: line %d: invalid JSON, skipped", path, line_no)
                    skipped += 1
                    continue
                handle(rec, line_no)
        else:
            reader = csv.DictReader(f)
            for line_no, row in enumerate(reader, 2):
                handle({k: v for k, v in row.items() if v not in (None, "")}, line_no)

    if not tweets:
        logger.warning("ingest %s: no tweets loaded", path)
    if skipped:
        logger.warning("ingest %s: skipped %d malformed record(s)", path, skipped)

    return Dataset(
        name=name or Path(path).stem,
        tweets=tuple(tweets),
        disaster_keywords=textnorm.load_disaster_keywords(keywords_path),
        summary_budget=summary_budget,
    )


def normalize(dataset: Dataset, stopwords: frozenset[str] | None = None) -> Dataset:
    """Apply the token pipeline, drop emptied tweets, remove duplicates/retweets.

    Dedup keys on clean_text; within a duplicate group the first tweet not
    carrying a leading RT marker wins (the presumed original), else the
    first occurrence. Idempotent.
    """
    if stopwords is None:
        stopwords = textnorm.load_stopwords()

    groups: dict[str, list[Tweet]] = {}
    order: list[str] = []
    for tw in dataset.tweets:
        tokens = textnorm.tokenize(tw.raw_text, stopwords, dataset.disaster_keywords)
        if not tokens:
            continue
        clean = " ".join(tokens)
        norm = replace(tw, clean_text=clean, tokens=tuple(tokens))
        if clean not in groups:
            groups[clean] = []
            order.append(clean)
        groups[clean].append(norm)

    kept: list[Tweet] = []
    for clean in order:
        group = groups[clean]
        originals = [t for t in group if not RT_PREFIX_RE.match(t.raw_text)]
        kept.append(originals[0] if originals else group[0])

    dropped = len(dataset.tweets) - len(kept)
    if dropped:
        logger.info("normalize %s: dropped %d tweet(s) (empty, duplicate or retweet)",
                    dataset.name, dropped)
    return replace(dataset, tweets=tuple(kept))


class TermIndex:
    """Immutable TF-IDF index over a normalized dataset.

    idf(term) = ln(N / df(term)); a tweet's vector entry is tf * idf.
    """

    def __init__(self, dataset: Dataset):
        if not dataset.tweets or not any(t.tokens for t in dataset.tweets):
            raise ValueError("cannot index an empty or unnormalized dataset")
        self.n_tweets = len(dataset.tweets)
        self.tf: dict[str, Counter] = {t.id: Counter(t.tokens) for t in dataset.tweets}
        df = Counter()
        for counts in self.tf.values():
            df.update(counts.keys())
        self.idf: dict[str, float] = {
            term: math.log(self.n_tweets / d) for term, d in df.items()
        }
        self.ids: tuple[str, ...] = tuple(t.id for t in dataset.tweets)
        self.terms: tuple[str, ...] = tuple(sorted(self.idf))
        self._vectors: dict[str, dict[str, float]] = {
            tid: {term: c * self.idf[term] for term, c in counts.items()}
            for tid, counts in self.tf.items()
        }
        self._norms: dict[str, float] = {
            tid: math.sqrt(sum(w * w for w in vec.values()))
            for tid, vec in self._vectors.items()
        }

    def vector(self, tweet_id: str) -> dict[str, float]:
        return dict(self._vectors[tweet_id])

    def weight(self, tweet_id: str, term: str) -> float:
        return self.tf[tweet_id].get(term, 0) * self.idf.get(term, 0.0)

    def cosine(self, a: str, b: str) -> float:
        na, nb = self._norms[a], self._norms[b]
        if na == 0.0 or nb == 0.0:
            return 0.0
        va = self._vectors[a]
        vb = self._vectors[b]
        if len(vb) < len(va):
            va, vb = vb, va
        dot = sum(w * vb.get(term, 0.0) for term, w in va.items())
        return dot / (na * nb)

    def term_mass(self, term: str) -> float:
        """Aggregate TF-IDF weight of a term over the whole corpus."""
        idf = self.idf.get(term, 0.0)
        if idf == 0.0:
            return 0.0
        return idf * sum(counts.get(term, 0) for counts in self.tf.values())

    def matrix(self, ids: tuple[str, ...] | None = None) -> tuple[np.ndarray, tuple[str, ...], tuple[str, ...]]:
        """Dense term-by-tweet TF-IDF matrix (terms sorted, tweets in corpus order)."""
        ids = self.ids if ids is None else ids
        term_pos = {t: i for i, t in enumerate(self.terms)}
        mat = np.zeros((len(self.terms), len(ids)))
        for j, tid in enumerate(ids):
            for term, w in self.vector(tid).items():
                mat[term_pos[term], j] = w
        return mat, self.terms, ids


def tfidf_index(dataset: Dataset) -> TermIndex:
    """Build the TF-IDF index for a normalized dataset."""
    return TermIndex(dataset)
