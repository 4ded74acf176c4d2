"""Evaluation report assembly: per-dataset matrices of rating aggregates,
topic coverage, relevance-label distribution, diversity and method ROUGE
scores, in JSON plus a markdown rendering.
"""

from __future__ import annotations

import logging

from .annotation import SessionStore, aggregate_ratings
from .corpus import Dataset, tfidf_index
from .embeddings import EmbeddingTable
from .metrics import coverage_report, relevance_distribution, rouge, summary_diversity
from .ranker import CandidateSet, candidate_fraction
from .summarizers import BASE_METHODS, SummaryRecord, summarize
from .taxonomy import TopicAssignment, TopicLabel

logger = logging.getLogger(__name__)


def _summary_tokens(record: SummaryRecord, dataset: Dataset) -> list[str]:
    by_id = dataset.by_id()
    tokens: list[str] = []
    for tid in record.tweet_ids:
        tokens.extend(by_id[tid].tokens)
    return tokens


def candidates_section(candidates: list[CandidateSet]) -> dict:
    per_topic = [
        {"topic": c.topic.value, "source_size": c.source_size,
         "shortlist": len(c.ranked_ids)}
        for c in candidates
    ]
    return {
        "per_topic": per_topic,
        "classified": sum(c.source_size for c in candidates),
        "shortlisted": sum(len(c.ranked_ids) for c in candidates),
        "fraction": candidate_fraction(candidates),
    }


def rouge_matrix(dataset: Dataset, references: list[SummaryRecord],
                 methods=BASE_METHODS, seed: int = 0) -> list[dict]:
    """Table of mean ROUGE-1/2/L F1 per method against the human references."""
    if not references:
        return []
    index = tfidf_index(dataset)
    ref_tokens = [_summary_tokens(r, dataset) for r in references]
    rows = []
    for method in methods:
        record = summarize(method, dataset, dataset.summary_budget, seed=seed, index=index)
        sys_tokens = _summary_tokens(record, dataset)
        scores = [rouge(sys_tokens, ref) for ref in ref_tokens]
        n = len(scores)
        rows.append({
            "method": method,
            "rouge1_f1": sum(s.rouge1_f1 for s in scores) / n,
            "rouge2_f1": sum(s.rouge2_f1 for s in scores) / n,
            "rougeL_f1": sum(s.rougeL_f1 for s in scores) / n,
        })
    return rows


def dataset_report(
    dataset: Dataset,
    assignment: TopicAssignment | None = None,
    candidates: list[CandidateSet] | None = None,
    store: SessionStore | None = None,
    table: EmbeddingTable | None = None,
    include_rouge: bool = False,
    methods=BASE_METHODS,
    seed: int = 0,
) -> dict:
    """Assemble every available evaluation section for one dataset.

    Sections that lack their inputs (no finalized sessions, no embeddings,
    no relevance labels) are emitted empty rather than failing.
    """
    report: dict = {
        "dataset": {"name": dataset.name, "tweets": len(dataset.tweets),
                    "summary_budget": dataset.summary_budget},
    }
    if candidates:
        report["candidates"] = candidates_section(candidates)

    sessions = store.finalized_sessions(dataset.name) if store else []
    records = [(s, store.records[s.session_id]) for s in sessions]
    by_id = dataset.by_id()
    labels = {t.id: t.relevance_label for t in dataset.tweets
              if t.relevance_label is not None}

    ratings_rows = []
    for sess, _ in records:
        rs = store.ratings.get(sess.session_id, [])
        if rs:
            row = {"session_id": sess.session_id, "annotator_id": sess.annotator_id,
                   "n_ratings": len(rs), **aggregate_ratings(rs)}
            ratings_rows.append(row)
    report["ratings"] = ratings_rows

    coverage_rows = []
    missed_sets = []
    if assignment is not None:
        n_topics = len([t for t in TopicLabel if assignment.by_topic.get(t)])
        for sess, rec in records:
            try:
                cov = coverage_report(rec, assignment)
            except ValueError as e:
                logger.warning("report %s: coverage for %s skipped: %s",
                               dataset.name, sess.session_id, e)
                continue
            coverage_rows.append({"session_id": sess.session_id,
                                  "annotator_id": sess.annotator_id,
                                  "topics_present": cov.topics_present,
                                  "missed": [t.value for t in cov.missed]})
            missed_sets.append(set(cov.missed))
        missed_across = set.intersection(*missed_sets) if missed_sets else set()
        report["coverage"] = {
            "topics_in_dataset": n_topics,
            "per_summary": coverage_rows,
            "missed_across_annotators": [t.value for t in TopicLabel
                                         if t in missed_across],
        }

    relevance_rows = []
    for sess, rec in records:
        if all(tid in labels for tid in rec.tweet_ids):
            dist = relevance_distribution(rec, labels)
            relevance_rows.append({"session_id": sess.session_id,
                                   "annotator_id": sess.annotator_id, **dist})
    report["relevance"] = relevance_rows

    diversity_rows = []
    if table is not None:
        for sess, rec in records:
            try:
                div = summary_diversity(rec, dataset, table)
            except ValueError as e:
                logger.warning("report %s: diversity for %s skipped: %s",
                               dataset.name, sess.session_id, e)
                continue
            diversity_rows.append({"session_id": sess.session_id,
                                   "annotator_id": sess.annotator_id,
                                   "avg_diversity": div})
    report["diversity"] = diversity_rows

    if include_rouge:
        refs = [rec for _, rec in records]
        report["rouge"] = rouge_matrix(dataset, refs, methods=methods, seed=seed)
    return report


def _md_table(headers: list[str], rows: list[list]) -> list[str]:
    out = ["| " + " | ".join(headers) + " |",
           "| " + " | ".join("---" for _ in headers) + " |"]
    for row in rows:
        out.append("| " + " | ".join(str(c) for c in row) + " |")
    return out


def render_markdown(report: dict) -> str:
    """Markdown rendering of dataset_report output, one matrix per section."""
    ds = report["dataset"]
    lines = [f"# Evaluation report: {ds['name']}", "",
             f"{ds['tweets']} tweets, summary budget {ds['summary_budget']}.", ""]

    cand = report.get("candidates")
    if cand:
        lines += ["## Candidate shortlists", ""]
        lines += _md_table(
            ["Topic", "Topic size", "Shortlist"],
            [[r["topic"], r["source_size"], r["shortlist"]] for r in cand["per_topic"]])
        lines += ["",
                  f"Shortlisted {cand['shortlisted']} of {cand['classified']} "
                  f"classified tweets ({100.0 * cand['fraction']:.2f}%).", ""]

    if report.get("ratings"):
        lines += ["## Rating aggregates (1-5 scale)", ""]
        lines += _md_table(
            ["Annotator", "Coverage", "Relevance", "Diversity", "# ratings"],
            [[r["annotator_id"], f"{r['coverage']:.2f}", f"{r['relevance']:.2f}",
              f"{r['diversity']:.2f}", r["n_ratings"]] for r in report["ratings"]])
        lines.append("")

    cov = report.get("coverage")
    if cov and cov["per_summary"]:
        lines += ["## Topic coverage", "",
                  f"Dataset topics: {cov['topics_in_dataset']}", ""]
        lines += _md_table(
            ["Annotator", "Topics present", "Missed"],
            [[r["annotator_id"], r["topics_present"], ", ".join(r["missed"]) or "-"]
             for r in cov["per_summary"]])
        missed = ", ".join(cov["missed_across_annotators"]) or "-"
        lines += ["", f"Missed across annotators: {missed}", ""]

    if report.get("relevance"):
        lines += ["## Relevance label distribution (%)", ""]
        lines += _md_table(
            ["Annotator", "High", "Medium", "Low"],
            [[r["annotator_id"], f"{r['high_pct']:.2f}", f"{r['med_pct']:.2f}",
              f"{r['low_pct']:.2f}"] for r in report["relevance"]])
        lines.append("")

    if report.get("diversity"):
        lines += ["## Summary diversity", ""]
        lines += _md_table(
            ["Annotator", "AvgDiv"],
            [[r["annotator_id"], f"{r['avg_diversity']:.4f}"]
             for r in report["diversity"]])
        lines.append("")

    if report.get("rouge"):
        lines += ["## ROUGE F1 vs. human summaries", ""]
        lines += _md_table(
            ["Method", "ROUGE-1", "ROUGE-2", "ROUGE-L"],
            [[r["method"], f"{r['rouge1_f1']:.2f}", f"{r['rouge2_f1']:.2f}",
              f"{r['rougeL_f1']:.2f}"] for r in report["rouge"]])
        lines.append("")

    return "\n".join(lines).rstrip() + "\n"
