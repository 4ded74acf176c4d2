"""Tokenization and normalization primitives for tweet text.

The pipeline is deliberately self-contained and deterministic: case folding,
URL / mention / hashtag-marker stripping, stopword removal, a light
suffix stemmer with a documented exception table, and a minimum-length
rule that spares disaster-domain keywords. Running the pipeline on its
own output is a no-op (idempotence is relied on by the corpus layer and
enforced by tests).
"""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources
from pathlib import Path

URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
MENTION_RE = re.compile(r"@\w+")
TOKEN_RE = re.compile(r"[a-z0-9]+")
NUMERAL_RE = re.compile(r"^[0-9][0-9,.]*$")

MIN_TOKEN_LEN = 3

VOWELS = set("aeiou")

# Words the suffix rules would mangle. Keys and values are lowercase;
# values must be fixed points of stem().
STEM_EXCEPTIONS = {
    "people": "people",
    "men": "man",
    "women": "woman",
    "children": "child",
    "news": "news",
    "crises": "crisis",
    "series": "series",
    "species": "species",
    "died": "die",
    "dying": "die",
}


def _undouble(word: str) -> str:
    # run pattern of Porter 1b: collapse a trailing doubled consonant
    # except l/s/z (falling -> fall, running -> run).
    if len(word) >= 2 and word[-1] == word[-2] and word[-1] not in VOWELS and word[-1] not in "lsz":
        return word[:-1]
    return word


def _stem_pass(word: str) -> str:
    if word in STEM_EXCEPTIONS:
        return STEM_EXCEPTIONS[word]
    if len(word) < 4:
        return word

    # plurals
    if word.endswith("sses"):
        word = word[:-2]
    elif word.endswith("ies") and len(word) >= 5:
        word = word[:-3] + "i"
    elif word.endswith("s") and not word.endswith(("ss", "us", "is")):
        word = word[:-1]

    # participles
    if word.endswith("ing") and len(word) >= 7 and any(c in VOWELS for c in word[:-3]):
        word = _undouble(word[:-3])
    elif word.endswith("ed") and len(word) >= 6 and any(c in VOWELS for c in word[:-2]):
        word = _undouble(word[:-2])

    # terminal y after a consonant (study/studies -> studi)
    if word.endswith("y") and len(word) >= 4 and word[-2] not in VOWELS:
        word = word[:-1] + "i"

    # strip trailing e so base and inflected forms meet (damage/damaged -> damag)
    if word.endswith("e") and len(word) >= 5:
        word = word[:-1]

    return word


@lru_cache(maxsize=65536)
def stem(word: str) -> str:
    """Light deterministic suffix stemmer.

    Not a linguistic lemmatizer: it maps each surface family
    (flood/floods/flooded/flooding) to one stable key. Rules run to a
    fixpoint, so stem(stem(w)) == stem(w) for every w.
    """
    word = word.lower()
    while True:
        out = _stem_pass(word)
        if out == word:
            return out
        word = out


def _read_terms(path: Path) -> list[str]:
    terms = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            terms.append(line.lower())
    return terms


def _bundled(name: str) -> Path:
    return Path(str(resources.files("crisissumm.data").joinpath(name)))


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Stopword set from `path`, or the bundled default list."""
    p = Path(path) if path is not None else _bundled("stopwords.txt")
    return frozenset(_read_terms(p))


def load_disaster_keywords(path: str | Path | None = None) -> frozenset[str]:
    """Disaster keyword lexicon (one term per line), stemmed for matching."""
    p = Path(path) if path is not None else _bundled("disaster_keywords.txt")
    return frozenset(stem(t) for t in _read_terms(p))


def tokenize(
    text: str,
    stopwords: frozenset[str],
    keywords: frozenset[str] = frozenset(),
) -> list[str]:
    """Full normalization pipeline for one tweet text.

    Order matters for idempotence: stopwords are filtered both before and
    after stemming, and the length rule runs last. `keywords` must already
    be stemmed (see load_disaster_keywords).
    """
    text = text.lower()
    text = URL_RE.sub(" ", text)
    text = MENTION_RE.sub(" ", text)
    # TOKEN_RE drops punctuation, emoticons and hashtag markers; the tag
    # text itself survives as an ordinary token.

    out = []
    for tok in TOKEN_RE.findall(text):
        if tok in stopwords:
            continue
        tok = stem(tok)
        if tok in stopwords:
            continue
        if len(tok) < MIN_TOKEN_LEN and tok not in keywords:
            continue
        out.append(tok)
    return out


def simple_tokens(text: str) -> list[str]:
    """Case-folded word split with no filtering (embedding lookup, raw ROUGE)."""
    return TOKEN_RE.findall(text.lower())
