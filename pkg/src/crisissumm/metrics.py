"""Summary evaluation stack: topic coverage, relevance-label distribution,
pairwise embedding diversity and ROUGE-1/2/L F1.

All functions are pure; none mutate their inputs.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from itertools import combinations

import numpy as np

logger = logging.getLogger(__name__)

from .corpus import Dataset, Tweet
from .embeddings import EmbeddingTable, cosine, load_embeddings  # noqa: F401  (re-export)
from .summarizers import SummaryRecord
from .taxonomy import TopicAssignment, TopicLabel
from .textnorm import simple_tokens


@dataclass(frozen=True)
class CoverageReport:
    topics_present: int
    present: tuple[TopicLabel, ...]
    missed: tuple[TopicLabel, ...]

    def to_dict(self) -> dict:
        return {"topics_present": self.topics_present,
                "present": [t.value for t in self.present],
                "missed": [t.value for t in self.missed]}


@dataclass(frozen=True)
class RougeScores:
    rouge1_f1: float
    rouge2_f1: float
    rougeL_f1: float

    def __post_init__(self):
        for v in (self.rouge1_f1, self.rouge2_f1, self.rougeL_f1):
            if not (0.0 <= v <= 1.0):
                raise ValueError("ROUGE F1 out of [0, 1]")

    def to_dict(self) -> dict:
        return {"rouge1_f1": self.rouge1_f1, "rouge2_f1": self.rouge2_f1,
                "rougeL_f1": self.rougeL_f1}


def coverage_report(summary: SummaryRecord, assignment: TopicAssignment) -> CoverageReport:
    """Which dataset topics the summary touches, Table-of-missed-topics style."""
    topic_of = assignment.topic_of()
    unknown = [tid for tid in summary.tweet_ids if tid not in topic_of]
    if unknown:
        raise ValueError(f"summary tweets not classified: {unknown[:5]}")
    present = {topic_of[tid] for tid in summary.tweet_ids}
    dataset_topics = [t for t in TopicLabel if assignment.by_topic.get(t)]
    return CoverageReport(
        topics_present=len(present),
        present=tuple(t for t in dataset_topics if t in present),
        missed=tuple(t for t in dataset_topics if t not in present),
    )


def relevance_distribution(summary: SummaryRecord,
                           labels: dict[str, str]) -> dict[str, float]:
    """Percentage of summary tweets at each relevance label.

    Percentages are over the summary size and sum to 100 (+-0.01).
    """
    if not summary.tweet_ids:
        raise ValueError("empty summary")
    counts = Counter()
    for tid in summary.tweet_ids:
        label = labels.get(tid)
        if label is None:
            raise ValueError(f"summary tweet {tid} has no relevance label")
        label = label.lower()
        if label not in ("high", "medium", "low"):
            raise ValueError(f"bad relevance label {label!r} for {tid}")
        counts[label] += 1
    n = len(summary.tweet_ids)
    return {
        "high_pct": 100.0 * counts["high"] / n,
        "med_pct": 100.0 * counts["medium"] / n,
        "low_pct": 100.0 * counts["low"] / n,
    }


def explanation_vector(explanation: str, table: EmbeddingTable) -> np.ndarray:
    """Mean embedding of the explanation's in-vocabulary words (case-folded).

    All-out-of-vocabulary explanations yield the zero vector; cosine against
    it is defined as 0, so such pairs count as maximally diverse.
    """
    return table.mean_vector(simple_tokens(explanation))


def pair_diversity(expl_a: str, expl_b: str, table: EmbeddingTable) -> float:
    """1 - cosine(mean embedding of a, mean embedding of b).

    Exactly 0.0 for identical explanations.
    """
    return 1.0 - cosine(explanation_vector(expl_a, table),
                        explanation_vector(expl_b, table))


def avg_diversity(explanations: list[str], table: EmbeddingTable) -> float:
    """Mean pairwise diversity over all unordered explanation pairs.

    Values are reported raw: a pair with negative cosine similarity yields a
    diversity above 1, which is flagged in the log rather than clamped.
    """
    if len(explanations) < 2:
        raise ValueError("diversity needs at least 2 tweets")
    vecs = [explanation_vector(e, table) for e in explanations]
    divs = [1.0 - cosine(a, b) for a, b in combinations(vecs, 2)]
    negative_pairs = sum(1 for d in divs if d > 1.0 + 1e-12)
    if negative_pairs:
        logger.warning("avg_diversity: %d pair(s) with negative cosine "
                       "similarity (diversity above 1), reported unclamped",
                       negative_pairs)
    return float(np.mean(divs))


def summary_diversity(summary: SummaryRecord, dataset: Dataset,
                      table: EmbeddingTable) -> float:
    """avg_diversity over the explanations of the summary's tweets."""
    by_id = dataset.by_id()
    explanations = []
    for tid in summary.tweet_ids:
        tw: Tweet | None = by_id.get(tid)
        if tw is None:
            raise ValueError(f"summary tweet {tid} not in dataset")
        if tw.explanation is None:
            raise ValueError(f"summary tweet {tid} has no explanation")
        explanations.append(tw.explanation)
    return avg_diversity(explanations, table)


def _ngram_counts(tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def rouge_n(system, reference, n: int) -> float:
    """ROUGE-N F1 with clipped n-gram counts."""
    sys_counts = _ngram_counts(system, n)
    ref_counts = _ngram_counts(reference, n)
    match = sum(min(c, ref_counts[g]) for g, c in sys_counts.items())
    sys_total = sum(sys_counts.values())
    ref_total = sum(ref_counts.values())
    if sys_total == 0 or ref_total == 0:
        return 0.0
    return _f1(match / sys_total, match / ref_total)


def _lcs_len(a, b) -> int:
    # O(len(a) * len(b)) dynamic program, one rolling row
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0]
        for j, y in enumerate(b, 1):
            curr.append(prev[j - 1] + 1 if x == y else max(prev[j], curr[j - 1]))
        prev = curr
    return prev[-1]


def rouge_l(system, reference) -> float:
    """ROUGE-L F1 over the whole token sequences (sentence-agnostic)."""
    if not system or not reference:
        return 0.0
    lcs = _lcs_len(list(system), list(reference))
    return _f1(lcs / len(system), lcs / len(reference))


def rouge(system, reference) -> RougeScores:
    """ROUGE-1/2/L F1 between two token sequences."""
    system = list(system)
    reference = list(reference)
    if not system or not reference:
        raise ValueError("rouge requires nonempty token lists")
    return RougeScores(
        rouge1_f1=rouge_n(system, reference, 1),
        rouge2_f1=rouge_n(system, reference, 2),
        rougeL_f1=rouge_l(system, reference),
    )
