"""Classical extractive summarizers operating under a tweet-count budget.

Each method returns tweets in selection order; every ordering is
deterministic given (dataset, method, seed). The methods deliberately share
one TF-IDF index so cross-method comparisons see identical term statistics.
"""

from __future__ import annotations

import json
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass

import numpy as np
from sklearn.cluster import AgglomerativeClustering, KMeans

from .corpus import Dataset, TermIndex
from .ranker import DmmrParams, dmmr_rank
from .taxonomy import DEFAULT_THRESHOLD, TopicLabel, TopicLexicon, classify

logger = logging.getLogger(__name__)

NUMERAL_RE = re.compile(r"^[0-9][0-9,.]*$")

RRF_K = 60  # standard reciprocal-rank-fusion constant


@dataclass(frozen=True)
class SummaryRecord:
    method: str
    dataset: str
    tweet_ids: tuple[str, ...]
    budget: int

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if len(set(self.tweet_ids)) != len(self.tweet_ids):
            raise ValueError("duplicate tweet ids in summary")
        if len(self.tweet_ids) > self.budget:
            raise ValueError("summary exceeds budget")

    def to_dict(self) -> dict:
        return {"method": self.method, "dataset": self.dataset,
                "budget": self.budget, "tweet_ids": list(self.tweet_ids)}

    @classmethod
    def from_dict(cls, d: dict) -> "SummaryRecord":
        return cls(method=d["method"], dataset=d["dataset"],
                   tweet_ids=tuple(d["tweet_ids"]), budget=int(d["budget"]))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, ensure_ascii=False, indent=2, sort_keys=True)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "SummaryRecord":
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


@dataclass(frozen=True)
class SentenceGraph:
    """Symmetric cosine-similarity graph over tweets; zero diagonal."""

    ids: tuple[str, ...]
    weights: np.ndarray
    threshold: float = 0.0

    def __post_init__(self):
        n = len(self.ids)
        if self.weights.shape != (n, n):
            raise ValueError("weight matrix shape mismatch")
        if not np.allclose(self.weights, self.weights.T):
            raise ValueError("weight matrix must be symmetric")
        if np.any(self.weights < -1e-12) or np.any(self.weights > 1.0 + 1e-9):
            raise ValueError("weights must lie in [0, 1]")
        if np.any(np.abs(np.diag(self.weights)) > 1e-12):
            raise ValueError("diagonal must be zero")


def build_graph(index: TermIndex, ids=None, threshold: float = 0.0) -> SentenceGraph:
    ids = tuple(index.ids if ids is None else ids)
    n = len(ids)
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            s = index.cosine(ids[i], ids[j])
            if s >= threshold:
                w[i, j] = w[j, i] = s
    return SentenceGraph(ids=ids, weights=w, threshold=threshold)


def lexrank_scores(graph: SentenceGraph, damping: float = 0.85,
                   epsilon: float = 1e-8, max_iter: int = 200):
    """Damped power iteration on the row-normalized similarity matrix.

    Returns ({id: score}, converged). Scores always sum to 1; rows with no
    edges teleport uniformly.
    """
    if len(graph.ids) == 0:
        raise ValueError("empty graph")
    if not (0.0 < damping < 1.0):
        raise ValueError("damping must be in (0, 1)")
    n = len(graph.ids)
    row_sums = graph.weights.sum(axis=1)
    safe = np.where(row_sums > 0.0, row_sums, 1.0)
    m = graph.weights / safe[:, None]
    m[row_sums == 0.0] = 1.0 / n  # dangling rows teleport uniformly

    p = np.full(n, 1.0 / n)
    converged = False
    for _ in range(max_iter):
        p_next = (1.0 - damping) / n + damping * (m.T @ p)
        if np.max(np.abs(p_next - p)) < epsilon:
            p = p_next
            converged = True
            break
        p = p_next
    if not converged:
        logger.warning("lexrank_scores: no convergence after %d iterations", max_iter)
    return {tid: float(s) for tid, s in zip(graph.ids, p)}, converged


def _top_by_score(scores: dict[str, float], budget: int) -> list[str]:
    return [tid for tid, _ in sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))][:budget]


def _luhn(dataset: Dataset, index: TermIndex, budget: int, seed: int) -> list[str]:
    freq = Counter()
    for tw in dataset.tweets:
        freq.update(tw.tokens)
    scores = {}
    for tw in dataset.tweets:
        scores[tw.id] = sum(freq[t] for t in tw.tokens) / len(tw.tokens)
    return _top_by_score(scores, budget)


def _sumbasic(dataset: Dataset, index: TermIndex, budget: int, seed: int) -> list[str]:
    freq = Counter()
    for tw in dataset.tweets:
        freq.update(tw.tokens)
    total = sum(freq.values())
    p = {w: c / total for w, c in freq.items()}

    remaining = {tw.id: tw for tw in dataset.tweets}
    selected: list[str] = []
    while remaining and len(selected) < budget:
        for word, _ in sorted(p.items(), key=lambda kv: (-kv[1], kv[0])):
            holders = [tid for tid, tw in remaining.items() if word in tw.tokens]
            if not holders:
                continue
            best = min(holders, key=lambda tid: (
                -sum(p[t] for t in remaining[tid].tokens) / len(remaining[tid].tokens), tid))
            selected.append(best)
            for t in set(remaining[best].tokens):
                p[t] = p[t] ** 2
            del remaining[best]
            break
        else:
            break
    return selected


def _content_words(tokens) -> set[str]:
    return {t for t in tokens if len(t) >= 3 or NUMERAL_RE.match(t)}


def _cowts(dataset: Dataset, index: TermIndex, budget: int, seed: int) -> list[str]:
    # greedy weighted set cover over content words, weighted by corpus TF-IDF mass
    mass = {}
    for tw in dataset.tweets:
        for t in _content_words(tw.tokens):
            if t not in mass:
                mass[t] = index.term_mass(t)
    words = {tw.id: _content_words(tw.tokens) for tw in dataset.tweets}
    totals = {tid: sum(mass[t] for t in ws) for tid, ws in words.items()}

    covered: set[str] = set()
    remaining = set(words)
    selected: list[str] = []
    while remaining and len(selected) < budget:
        gains = {tid: sum(mass[t] for t in words[tid] - covered) for tid in remaining}
        best = min(remaining, key=lambda tid: (-gains[tid], -totals[tid], tid))
        selected.append(best)
        covered |= words[best]
        remaining.remove(best)
    return selected


def _lexrank(dataset: Dataset, index: TermIndex, budget: int, seed: int,
             damping: float = 0.85, threshold: float = 0.1,
             epsilon: float = 1e-8) -> list[str]:
    graph = build_graph(index, threshold=threshold)
    scores, _ = lexrank_scores(graph, damping=damping, epsilon=epsilon)
    return _top_by_score(scores, budget)


def _tweet_rows(index: TermIndex) -> np.ndarray:
    mat, _, _ = index.matrix()
    rows = mat.T.copy()
    norms = np.linalg.norm(rows, axis=1)
    zero = norms == 0.0
    # keep degenerate all-common-vocabulary tweets clusterable
    rows[zero] = 1.0 / max(1, rows.shape[1])
    norms = np.linalg.norm(rows, axis=1)
    return rows / norms[:, None]


def _round_robin(cluster_order, pick_next, budget: int) -> list[str]:
    selected: list[str] = []
    active = list(cluster_order)
    while active and len(selected) < budget:
        progressed = []
        for c in active:
            tid = pick_next(c, selected)
            if tid is None:
                continue
            selected.append(tid)
            progressed.append(c)
            if len(selected) >= budget:
                break
        active = [c for c in active if c in progressed]
    return selected


def _cluster_order(labels: np.ndarray, ids) -> list[int]:
    sizes = Counter(labels.tolist())
    first_id = {}
    for tid, lab in zip(ids, labels.tolist()):
        if lab not in first_id or tid < first_id[lab]:
            first_id[lab] = tid
    return sorted(sizes, key=lambda lab: (-sizes[lab], first_id[lab]))


def _clusterrank(dataset: Dataset, index: TermIndex, budget: int, seed: int) -> list[str]:
    ids = index.ids
    n = len(ids)
    k = min(n, max(1, math.ceil(budget / 4)))
    rows = _tweet_rows(index)
    labels = KMeans(n_clusters=k, random_state=seed, n_init=10).fit_predict(rows)

    ranked: dict[int, list[str]] = {}
    for lab in set(labels.tolist()):
        members = tuple(tid for tid, l in zip(ids, labels.tolist()) if l == lab)
        graph = build_graph(index, ids=members)
        scores, _ = lexrank_scores(graph)
        ranked[lab] = _top_by_score(scores, len(members))

    def pick_next(lab, selected):
        for tid in ranked[lab]:
            if tid not in selected:
                return tid
        return None

    return _round_robin(_cluster_order(labels, ids), pick_next, budget)


def _mead(dataset: Dataset, index: TermIndex, budget: int, seed: int) -> list[str]:
    ids = index.ids
    n = len(ids)
    k = min(n, max(1, math.ceil(budget / 4)))
    rows = _tweet_rows(index)
    if k == 1 or n == 1:
        labels = np.zeros(n, dtype=int)
    else:
        labels = AgglomerativeClustering(
            n_clusters=k, metric="cosine", linkage="average").fit_predict(rows)

    members: dict[int, list[int]] = {}
    for i, lab in enumerate(labels.tolist()):
        members.setdefault(lab, []).append(i)
    centrality: dict[str, float] = {}
    for lab, idxs in members.items():
        centroid = rows[idxs].mean(axis=0)
        cn = np.linalg.norm(centroid)
        for i in idxs:
            centrality[ids[i]] = float(rows[i] @ centroid / cn) if cn > 0 else 0.0

    by_cluster = {lab: sorted((ids[i] for i in idxs),
                              key=lambda tid: (-centrality[tid], tid))
                  for lab, idxs in members.items()}

    def pick_next(lab, selected):
        best, best_score = None, -math.inf
        for tid in by_cluster[lab]:
            if tid in selected:
                continue
            redundancy = max((index.cosine(tid, s) for s in selected), default=0.0)
            score = centrality[tid] - redundancy
            if score > best_score:
                best, best_score = tid, score
        return best

    return _round_robin(_cluster_order(labels, ids), pick_next, budget)


def _lsa(dataset: Dataset, index: TermIndex, budget: int, seed: int) -> list[str]:
    mat, _, ids = index.matrix()
    if not mat.any():
        raise ValueError("degenerate all-zero TF-IDF matrix")
    _, s, vt = np.linalg.svd(mat, full_matrices=False)
    rank = int(np.sum(s > s[0] * 1e-12))
    vt = vt[:rank]

    selected: list[str] = []
    chosen = set()
    k = 0
    while len(selected) < min(budget, len(ids)):
        comp = vt[k % rank]
        best = min((j for j in range(len(ids)) if j not in chosen),
                   key=lambda j: (-abs(comp[j]), ids[j]))
        chosen.add(best)
        selected.append(ids[best])
        k += 1
    return selected


def lsa_select(dataset: Dataset, budget: int, index: TermIndex | None = None) -> SummaryRecord:
    """SVD concept-cycling selection, exposed directly for evaluation runs."""
    return summarize("lsa", dataset, budget, index=index)


def _ontodsumm_lite(dataset: Dataset, index: TermIndex, budget: int, seed: int,
                    lexicon: TopicLexicon | None = None,
                    threshold: float = DEFAULT_THRESHOLD,
                    params: DmmrParams = DmmrParams()) -> list[str]:
    lexicon = lexicon or TopicLexicon.load()
    assignment = classify(dataset, lexicon, threshold)
    buckets = {t: ids for t, ids in assignment.by_topic.items() if ids}
    if not buckets:
        logger.warning("ontodsumm_lite: nothing classified, falling back to lexrank")
        return _lexrank(dataset, index, budget, seed)

    total = sum(len(ids) for ids in buckets.values())
    take = min(budget, total)
    quotas = {t: take * len(ids) / total for t, ids in buckets.items()}
    alloc = {t: math.floor(q) for t, q in quotas.items()}
    leftover = take - sum(alloc.values())
    by_remainder = sorted(buckets, key=lambda t: (-(quotas[t] - alloc[t]),
                                                  TOPIC_ORDER.index(t)))
    while leftover > 0:
        progressed = False
        for t in by_remainder:
            if leftover == 0:
                break
            if alloc[t] < len(buckets[t]):
                alloc[t] += 1
                leftover -= 1
                progressed = True
        if not progressed:
            break

    by_id = dataset.by_id()
    selected: list[str] = []
    for topic in TOPIC_ORDER:
        if topic not in buckets or alloc.get(topic, 0) == 0:
            continue
        bucket = [by_id[tid] for tid in buckets[topic]]
        order = dmmr_rank(bucket, topic, index, lexicon, params,
                          keywords=dataset.disaster_keywords)
        selected.extend(order[: alloc[topic]])
    return selected


TOPIC_ORDER = tuple(t for t in TopicLabel if t is not TopicLabel.IRRELEVANT)

BASE_METHODS = ("luhn", "sumbasic", "cowts", "lexrank", "clusterrank",
                "lsa", "mead", "ontodsumm_lite")


def _ensum_lite(dataset: Dataset, index: TermIndex, budget: int, seed: int,
                pool: tuple[str, ...] = BASE_METHODS) -> list[str]:
    # reciprocal-rank fusion of the pool's selection orders
    rrf: dict[str, float] = {}
    for method in pool:
        if method not in _METHODS or method == "ensum_lite":
            raise ValueError(f"bad fusion pool entry {method!r}")
        order = _METHODS[method](dataset, index, budget, seed)
        for rank, tid in enumerate(order, 1):
            rrf[tid] = rrf.get(tid, 0.0) + 1.0 / (RRF_K + rank)
    return _top_by_score(rrf, budget)


_METHODS = {
    "luhn": _luhn,
    "sumbasic": _sumbasic,
    "cowts": _cowts,
    "lexrank": _lexrank,
    "clusterrank": _clusterrank,
    "lsa": _lsa,
    "mead": _mead,
    "ontodsumm_lite": _ontodsumm_lite,
    "ensum_lite": _ensum_lite,
}

METHOD_NAMES = tuple(_METHODS)


def summarize(method: str, dataset: Dataset, budget: int, seed: int = 0,
              index: TermIndex | None = None, **options) -> SummaryRecord:
    """Run one summarizer under a tweet budget.

    A budget larger than the corpus selects every tweet (with a warning);
    results are deterministic given (dataset, method, seed).
    """
    if method not in _METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHOD_NAMES)}")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if index is None:
        index = TermIndex(dataset)
    effective = budget
    if budget > len(dataset.tweets):
        logger.warning("summarize %s: budget %d exceeds corpus size %d; returning all tweets",
                       method, budget, len(dataset.tweets))
        effective = len(dataset.tweets)
    ids = _METHODS[method](dataset, index, effective, seed, **options)
    return SummaryRecord(method=method, dataset=dataset.name,
                         tweet_ids=tuple(ids), budget=budget)
