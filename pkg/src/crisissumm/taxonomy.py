"""Disaster topic taxonomy and the weighted-lexicon classifier.

Each tweet is scored against every topic's term lexicon (seed terms plus
optional pseudo-relevance-feedback expansions); the best-scoring topic wins,
ties broken by the fixed topic order below. Tweets scoring under the
threshold are dropped from all downstream stages. Matching is
stem-insensitive: lexicon terms and incoming tokens are reduced with the
same stemmer.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from .corpus import Dataset, TermIndex
from .textnorm import stem

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.5


class TopicLabel(str, Enum):
    # Declaration order is the deterministic tie-break priority.
    AFFECTED_POPULATION = "AffectedPopulation"
    EARLY_WARNING = "EarlyWarning"
    EMERGENCY_EXERCISES = "EmergencyExercises"
    EMOTIONAL_DISTRESS = "EmotionalDistress"
    HUMANITARIAN_EVENT = "HumanitarianEvent"
    IMPACT = "Impact"
    INFRASTRUCTURE_DAMAGE = "InfrastructureDamage"
    VOLUNTEERING_SUPPORT = "VolunteeringSupport"
    PRAYER = "Prayer"
    SUPPLY_NEEDS = "SupplyNeeds"
    IRRELEVANT = "Irrelevant"


TOPIC_PRIORITY: tuple[TopicLabel, ...] = tuple(TopicLabel)
CONTENT_TOPICS: tuple[TopicLabel, ...] = tuple(
    t for t in TopicLabel if t is not TopicLabel.IRRELEVANT
)


class TopicLexicon:
    """Per-topic term weights: seeds at weight 1.0 plus expanded terms in (0, 1].

    All stored terms are stemmed. Seeds for every content topic must be
    nonempty; Irrelevant carries no terms.
    """

    def __init__(self, entries: dict[TopicLabel, dict[str, float]],
                 seeds: dict[TopicLabel, frozenset[str]]):
        for topic in CONTENT_TOPICS:
            if not seeds.get(topic):
                raise ValueError(f"topic {topic.value} has no seed terms")
        for topic, weights in entries.items():
            for term, w in weights.items():
                if not (0.0 < w <= 1.0):
                    raise ValueError(f"weight out of (0,1] for {topic.value}:{term}: {w}")
        self._weights = {t: dict(entries.get(t, {})) for t in TopicLabel}
        self._seeds = {t: frozenset(seeds.get(t, frozenset())) for t in TopicLabel}

    def seeds(self, topic: TopicLabel) -> frozenset[str]:
        return self._seeds[topic]

    def terms(self, topic: TopicLabel) -> dict[str, float]:
        return dict(self._weights[topic])

    def weight(self, topic: TopicLabel, term: str) -> float:
        return self._weights[topic].get(term, 0.0)

    def max_seed_weight(self) -> float:
        best = 0.0
        for topic in CONTENT_TOPICS:
            for term in self._seeds[topic]:
                best = max(best, self._weights[topic].get(term, 0.0))
        return best

    def with_terms(self, topic: TopicLabel, added: dict[str, float]) -> "TopicLexicon":
        entries = {t: dict(w) for t, w in self._weights.items()}
        for term, w in added.items():
            entries[topic][term] = min(1.0, w)
        return TopicLexicon(entries, self._seeds)

    def all_terms(self, topic: TopicLabel) -> frozenset[str]:
        return frozenset(self._weights[topic])

    def to_dict(self) -> dict:
        out = {}
        for topic in TopicLabel:
            expanded = {t: w for t, w in sorted(self._weights[topic].items())
                        if t not in self._seeds[topic]}
            out[topic.value] = {"seeds": sorted(self._seeds[topic]), "weights": expanded}
        return out

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, ensure_ascii=False, indent=2, sort_keys=True)
            f.write("\n")

    @classmethod
    def from_dict(cls, d: dict) -> "TopicLexicon":
        entries: dict[TopicLabel, dict[str, float]] = {}
        seeds: dict[TopicLabel, frozenset[str]] = {}
        for topic in TopicLabel:
            spec = d.get(topic.value, {"seeds": [], "weights": {}})
            seed_terms = frozenset(stem(t.lower()) for t in spec.get("seeds", ()))
            weights = {stem(t.lower()): float(w) for t, w in spec.get("weights", {}).items()}
            for s in seed_terms:
                weights.setdefault(s, 1.0)
            entries[topic] = weights
            seeds[topic] = seed_terms
        return cls(entries, seeds)

    @classmethod
    def load(cls, path: str | Path | None = None) -> "TopicLexicon":
        """Load from a lexicon JSON file, or the bundled default."""
        if path is None:
            path = Path(str(resources.files("crisissumm.data").joinpath("topic_lexicon.json")))
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


@dataclass(frozen=True)
class TopicAssignment:
    """Partition of a dataset: per-topic tweet id lists plus the dropped ids."""

    by_topic: dict[TopicLabel, tuple[str, ...]]
    dropped: tuple[str, ...]

    def topic_of(self) -> dict[str, TopicLabel]:
        return {tid: topic for topic, ids in self.by_topic.items() for tid in ids}

    def classified_count(self) -> int:
        return sum(len(ids) for ids in self.by_topic.values())

    def to_dict(self) -> dict:
        return {
            "topics": {t.value: list(ids) for t, ids in self.by_topic.items() if ids},
            "dropped": list(self.dropped),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TopicAssignment":
        by_topic = {TopicLabel(t): tuple(ids) for t, ids in d.get("topics", {}).items()}
        return cls(by_topic=by_topic, dropped=tuple(d.get("dropped", ())))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, ensure_ascii=False, indent=2, sort_keys=True)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "TopicAssignment":
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


def score_tweet(tokens, lexicon: TopicLexicon, topic: TopicLabel) -> float:
    """Sum of lexicon weights over the tweet's distinct matched terms."""
    weights = lexicon._weights[topic]
    seen = set()
    total = 0.0
    for tok in tokens:
        key = tok if tok in weights else stem(tok)
        if key in weights and key not in seen:
            seen.add(key)
            total += weights[key]
    return total


def classify(dataset: Dataset, lexicon: TopicLexicon,
             threshold: float = DEFAULT_THRESHOLD) -> TopicAssignment:
    """Assign every tweet to its best-scoring topic or drop it.

    Deterministic: topic ties resolve by the TopicLabel declaration order.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    if not any(lexicon.all_terms(t) for t in CONTENT_TOPICS):
        raise ValueError("lexicon has no terms")

    buckets: dict[TopicLabel, list[str]] = {t: [] for t in CONTENT_TOPICS}
    dropped: list[str] = []
    for tw in dataset.tweets:
        best_topic = None
        best_score = 0.0
        for topic in CONTENT_TOPICS:
            s = score_tweet(tw.tokens, lexicon, topic)
            if s > best_score:
                best_topic, best_score = topic, s
        if best_topic is None or best_score < threshold:
            dropped.append(tw.id)
        else:
            buckets[best_topic].append(tw.id)

    by_topic = {t: tuple(ids) for t, ids in buckets.items() if ids}
    return TopicAssignment(by_topic=by_topic, dropped=tuple(dropped))


def expand_lexicon(dataset: Dataset, lexicon: TopicLexicon, k: int,
                   index: TermIndex | None = None,
                   threshold: float = DEFAULT_THRESHOLD) -> TopicLexicon:
    """One pseudo-relevance-feedback round.

    For each topic, the k highest aggregate-TF-IDF terms among its assigned
    tweets (excluding terms already in the lexicon) are added with weight =
    aggregate mass normalized by the topic's best candidate, capped at 1.
    Seeds are never removed.
    """
    if k == 0:
        logger.warning("expand_lexicon: k=0, lexicon unchanged")
        return lexicon
    if k < 0:
        raise ValueError("k must be nonnegative")
    if index is None:
        index = TermIndex(dataset)

    assignment = classify(dataset, lexicon, threshold)
    out = lexicon
    for topic in CONTENT_TOPICS:
        ids = assignment.by_topic.get(topic, ())
        if not ids:
            continue
        known = out.all_terms(topic)
        mass: dict[str, float] = {}
        for tid in ids:
            for term, count in index.tf[tid].items():
                if term in known or stem(term) in known:
                    continue
                mass[term] = mass.get(term, 0.0) + count * index.idf.get(term, 0.0)
        candidates = sorted(mass.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
        candidates = [(t, m) for t, m in candidates if m > 0.0]
        if not candidates:
            continue
        top = candidates[0][1]
        out = out.with_terms(topic, {t: m / top for t, m in candidates})
    return out


def topic_histogram(assignment: TopicAssignment) -> dict[TopicLabel, int]:
    """Tweet count per topic; zero-count topics are absent."""
    return {t: len(ids) for t, ids in assignment.by_topic.items() if ids}
