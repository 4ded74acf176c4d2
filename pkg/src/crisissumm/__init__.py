"""crisissumm: semi-automated ground-truth summary construction and
evaluation for disaster tweet corpora.

Pipeline: ingest -> normalize -> classify -> rank (per-topic shortlists) ->
human selection sessions -> evaluation (coverage, relevance, diversity,
ROUGE) with classical extractive baselines for comparison.
"""

from .annotation import (
    Mode,
    QaVerdict,
    QualitySample,
    Rating,
    SessionStore,
    aggregate_ratings,
    qa_sample,
    qa_verdict,
    sample_size,
)
from .corpus import Dataset, TermIndex, Tweet, ingest, normalize, tfidf_index
from .embeddings import EmbeddingTable, load_embeddings
from .metrics import (
    CoverageReport,
    RougeScores,
    avg_diversity,
    coverage_report,
    relevance_distribution,
    rouge,
    summary_diversity,
)
from .ranker import (
    CandidateSet,
    DmmrParams,
    build_candidates,
    candidate_fraction,
    dmmr_rank,
    shortlist_size,
)
from .summarizers import (
    METHOD_NAMES,
    SentenceGraph,
    SummaryRecord,
    build_graph,
    lexrank_scores,
    lsa_select,
    summarize,
)
from .taxonomy import (
    TopicAssignment,
    TopicLabel,
    TopicLexicon,
    classify,
    expand_lexicon,
    topic_histogram,
)

__version__ = "0.1.0"
