import json
import random

import pytest

from crisissumm.corpus import Dataset, Tweet, normalize
from crisissumm.taxonomy import TopicLabel, TopicLexicon
from crisissumm.textnorm import load_stopwords


@pytest.fixture(scope="session")
def stopwords():
    return load_stopwords()


@pytest.fixture(scope="session")
def default_lexicon():
    return TopicLexicon.load()


def build_dataset(texts, name="test", keywords=frozenset(), budget=40,
                  labels=None, explanations=None, normalized=True):
    """Dataset from raw texts; ids are t000, t001, ... in order."""
    labels = labels or {}
    explanations = explanations or {}
    tweets = tuple(
        Tweet(id=f"t{i:03d}", raw_text=text,
              relevance_label=labels.get(i), explanation=explanations.get(i))
        for i, text in enumerate(texts)
    )
    ds = Dataset(name=name, tweets=tweets, disaster_keywords=frozenset(keywords),
                 summary_budget=budget)
    return normalize(ds) if normalized else ds


def seeded_corpus(lexicon, n_tweets=100, words_per_tweet=3, seed=7,
                  topics=None, budget=40):
    """Synthetic corpus drawn from the lexicon's own seed terms.

    Returns (dataset, {tweet_id: generating topic}). Filler tokens are
    unique junk so they never collide with any topic lexicon.
    """
    rng = random.Random(seed)
    topics = topics or [t for t in TopicLabel
                        if t is not TopicLabel.IRRELEVANT and lexicon.seeds(t)]
    tweets = []
    truth = {}
    for i in range(n_tweets):
        topic = topics[i % len(topics)]
        seeds = sorted(lexicon.seeds(topic))
        take = min(words_per_tweet, len(seeds))
        words = rng.sample(seeds, take) + [f"zz{rng.randrange(10**6)}x{i}"]
        tid = f"t{i:03d}"
        tweets.append(Tweet(id=tid, raw_text=" ".join(words)))
        truth[tid] = topic
    ds = Dataset(name="synthetic", tweets=tuple(tweets), summary_budget=budget)
    ds = normalize(ds)
    truth = {tid: t for tid, t in truth.items() if tid in {tw.id for tw in ds.tweets}}
    return ds, truth


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec) + "\n")
    return path
