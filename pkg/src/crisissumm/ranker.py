"""Topic-aware greedy ranking and the annotator shortlist rule.

Within one topic, tweets are ordered by a maximal-marginal-relevance greedy:
the first pick maximizes topical relevance, each later pick maximizes
lambda * rel(x) - (1 - lambda) * max_similarity(x, already picked).
Relevance is the TF-IDF mass of a tweet's tokens that hit the topic lexicon
or the disaster keyword list, rescaled to [0, 1] within the topic.

The shortlist shown to annotators keeps whole topics of at most 25 tweets,
otherwise the top 25% (never fewer than 25).
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass

from .corpus import Dataset, TermIndex, Tweet
from .embeddings import EmbeddingTable, cosine
from .taxonomy import TopicAssignment, TopicLabel, TopicLexicon
from .textnorm import stem

logger = logging.getLogger(__name__)

SHORTLIST_MIN = 25
SHORTLIST_FRACTION = 0.25


@dataclass(frozen=True)
class DmmrParams:
    lambda_: float = 0.7
    sim: str = "tfidf_cosine"  # or "embedding_cosine"

    def __post_init__(self):
        if not (0.0 <= self.lambda_ <= 1.0):
            raise ValueError("lambda must be in [0, 1]")
        if self.sim not in ("tfidf_cosine", "embedding_cosine"):
            raise ValueError(f"unknown similarity {self.sim!r}")


@dataclass(frozen=True)
class CandidateSet:
    topic: TopicLabel
    ranked_ids: tuple[str, ...]
    source_size: int

    def __post_init__(self):
        if len(set(self.ranked_ids)) != len(self.ranked_ids):
            raise ValueError("duplicate ids in candidate set")
        if len(self.ranked_ids) != shortlist_size(self.source_size):
            raise ValueError("candidate set size violates the shortlist rule")


def shortlist_size(n: int) -> int:
    """Annotator shortlist size for a topic of n tweets."""
    if n < 1:
        raise ValueError("topic size must be >= 1")
    if n <= SHORTLIST_MIN:
        return n
    return max(SHORTLIST_MIN, math.ceil(SHORTLIST_FRACTION * n))


def relevance_scores(
    tweets: list[Tweet],
    topic: TopicLabel,
    index: TermIndex,
    lexicon: TopicLexicon,
    keywords: frozenset[str] = frozenset(),
) -> dict[str, float]:
    """Per-tweet topical relevance, rescaled to [0, 1] within the bucket."""
    topic_terms = lexicon.all_terms(topic)
    raw: dict[str, float] = {}
    for tw in tweets:
        total = 0.0
        for term, count in index.tf[tw.id].items():
            key = term if term in topic_terms else stem(term)
            if key in topic_terms or key in keywords or term in keywords:
                total += count * index.idf.get(term, 0.0)
        raw[tw.id] = total
    top = max(raw.values(), default=0.0)
    if top > 0.0:
        return {tid: v / top for tid, v in raw.items()}
    return raw


def _similarity_fn(params: DmmrParams, index: TermIndex,
                   tweets: list[Tweet], table: EmbeddingTable | None):
    if params.sim == "tfidf_cosine":
        return index.cosine
    if table is None:
        raise ValueError("embedding_cosine similarity requires an embedding table")
    vecs = {tw.id: table.mean_vector(tw.tokens) for tw in tweets}
    return lambda a, b: cosine(vecs[a], vecs[b])


def dmmr_rank(
    topic_tweets: list[Tweet],
    topic: TopicLabel,
    index: TermIndex,
    lexicon: TopicLexicon,
    params: DmmrParams = DmmrParams(),
    keywords: frozenset[str] = frozenset(),
    table: EmbeddingTable | None = None,
    with_scores: bool = False,
):
    """Greedy MMR ordering of one topic bucket (all tweets, not shortlisted).

    Ties at any step break toward the smaller tweet id. With
    with_scores=True returns [(id, score_at_selection)] for diagnostics;
    annotator payloads never include scores.
    """
    if not topic_tweets:
        raise ValueError("empty topic bucket")
    rel = relevance_scores(topic_tweets, topic, index, lexicon, keywords)
    sim = _similarity_fn(params, index, topic_tweets, table)
    lam = params.lambda_

    remaining = sorted(tw.id for tw in topic_tweets)
    selected: list[str] = []
    scores: list[float] = []
    max_sim: dict[str, float] = {tid: 0.0 for tid in remaining}

    while remaining:
        if not selected:
            best = min(remaining, key=lambda tid: (-rel[tid], tid))
            best_score = rel[best]
        else:
            best, best_score = None, -math.inf
            for tid in remaining:
                score = lam * rel[tid] - (1.0 - lam) * max_sim[tid]
                if score > best_score:
                    best, best_score = tid, score
        selected.append(best)
        scores.append(best_score)
        remaining.remove(best)
        for tid in remaining:
            s = sim(tid, best)
            if s > max_sim[tid]:
                max_sim[tid] = s

    if with_scores:
        return list(zip(selected, scores))
    return selected


def build_candidates(
    dataset: Dataset,
    assignment: TopicAssignment,
    index: TermIndex,
    lexicon: TopicLexicon,
    params: DmmrParams = DmmrParams(),
    table: EmbeddingTable | None = None,
) -> list[CandidateSet]:
    """One shortlisted CandidateSet per nonempty content topic.

    The overall candidate fraction (shortlisted / classified) is reported in
    the run log.
    """
    if not assignment.by_topic:
        raise ValueError("empty assignment")
    by_id = dataset.by_id()
    out: list[CandidateSet] = []
    for topic in TopicLabel:
        if topic is TopicLabel.IRRELEVANT:
            continue
        ids = assignment.by_topic.get(topic, ())
        if not ids:
            continue
        bucket = [by_id[tid] for tid in ids]
        order = dmmr_rank(bucket, topic, index, lexicon, params,
                          keywords=dataset.disaster_keywords, table=table)
        size = shortlist_size(len(bucket))
        out.append(CandidateSet(topic=topic, ranked_ids=tuple(order[:size]),
                                source_size=len(bucket)))
    fraction = candidate_fraction(out)
    logger.info("build_candidates %s: %d of %d classified tweets shortlisted (%.2f%%)",
                dataset.name, sum(len(c.ranked_ids) for c in out),
                sum(c.source_size for c in out), 100.0 * fraction)
    return out


def candidate_fraction(candidates: list[CandidateSet]) -> float:
    total = sum(c.source_size for c in candidates)
    if total == 0:
        return 0.0
    return sum(len(c.ranked_ids) for c in candidates) / total


def candidates_payload(candidates: list[CandidateSet], dataset: Dataset) -> list[dict]:
    """Annotator-facing JSON payload: topic, source size and tweet texts only.

    Deliberately score-free; the schema is asserted by tests.
    """
    by_id = dataset.by_id()
    return [
        {
            "topic": c.topic.value,
            "source_size": c.source_size,
            "tweets": [{"id": tid, "text": by_id[tid].raw_text} for tid in c.ranked_ids],
        }
        for c in candidates
    ]


def save_candidates(candidates: list[CandidateSet], dataset: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(candidates_payload(candidates, dataset), f,
                  ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")


def load_candidates(path) -> list[CandidateSet]:
    with open(path, encoding="utf-8") as f:
        payload = json.load(f)
    return [
        CandidateSet(topic=TopicLabel(c["topic"]),
                     ranked_ids=tuple(t["id"] for t in c["tweets"]),
                     source_size=int(c["source_size"]))
        for c in payload
    ]
