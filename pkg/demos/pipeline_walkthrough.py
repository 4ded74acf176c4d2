"""End-to-end library walkthrough on a small synthetic disaster corpus.

Builds a corpus, normalizes it, classifies topics, ranks each topic into an
annotator shortlist, runs the extractive baselines, and scores one of them
with ROUGE against another. Run from the repository root:

    python demos/pipeline_walkthrough.py
"""

import random

from crisissumm import (
    DmmrParams,
    METHOD_NAMES,
    build_candidates,
    candidate_fraction,
    classify,
    normalize,
    rouge,
    summarize,
    tfidf_index,
    topic_histogram,
)
from crisissumm.corpus import Dataset, Tweet
from crisissumm.taxonomy import TopicLabel, TopicLexicon

rng = random.Random(7)
lexicon = TopicLexicon.load()

# -- 1. a corpus: tweets assembled from topic vocabulary plus noise ---------
topics = [t for t in TopicLabel if t is not TopicLabel.IRRELEVANT]
tweets = []
for i in range(120):
    topic = topics[i % len(topics)]
    words = rng.sample(sorted(lexicon.seeds(topic)), 3)
    words.append(f"city{rng.randrange(30)}")
    tweets.append(Tweet(id=f"t{i:03d}", raw_text=" ".join(words)))

dataset = normalize(Dataset(name="walkthrough", tweets=tuple(tweets),
                            summary_budget=12))
print(f"corpus: {len(dataset.tweets)} tweets after normalization")

# -- 2. topic classification -------------------------------------------------
assignment = classify(dataset, lexicon, threshold=0.5)
print("\ntopic histogram:")
for topic, count in topic_histogram(assignment).items():
    print(f"  {topic.value:<22} {count}")
print(f"  dropped: {len(assignment.dropped)}")

# -- 3. per-topic ranking and the annotator shortlist ------------------------
index = tfidf_index(dataset)
candidates = build_candidates(dataset, assignment, index, lexicon,
                              DmmrParams(lambda_=0.7))
total = sum(c.source_size for c in candidates)
short = sum(len(c.ranked_ids) for c in candidates)
print(f"\nshortlists: {short} of {total} tweets "
      f"({100 * candidate_fraction(candidates):.1f}% reach annotators)")

# -- 4. extractive baselines under the same budget ---------------------------
print(f"\nbaselines (budget {dataset.summary_budget}):")
records = {}
for method in METHOD_NAMES:
    records[method] = summarize(method, dataset, dataset.summary_budget, seed=1)
    print(f"  {method:<15} -> {', '.join(records[method].tweet_ids[:5])} ...")

# -- 5. ROUGE between two baselines ------------------------------------------
by_id = dataset.by_id()


def tokens_of(record):
    return [tok for tid in record.tweet_ids for tok in by_id[tid].tokens]


scores = rouge(tokens_of(records["lexrank"]), tokens_of(records["ontodsumm_lite"]))
print("\nlexrank vs ontodsumm_lite (as pseudo-reference):")
print(f"  ROUGE-1 {scores.rouge1_f1:.3f}  ROUGE-2 {scores.rouge2_f1:.3f}  "
      f"ROUGE-L {scores.rougeL_f1:.3f}")
