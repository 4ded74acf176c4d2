"""Pretrained word-vector table in plain text format: `token v1 ... vD`.

Vectors are loaded, never trained here. Lookup is case-folded.
"""

from __future__ import annotations

import logging

import numpy as np

logger = logging.getLogger(__name__)


class EmbeddingTable:
    def __init__(self, dimension: int, vectors: dict[str, np.ndarray]):
        if dimension < 1:
            raise ValueError("dimension must be positive")
        converted = {tok.lower(): np.asarray(v, dtype=float)
                     for tok, v in vectors.items()}
        for tok, v in converted.items():
            if v.shape != (dimension,):
                raise ValueError(f"vector for {tok!r} has wrong dimension")
        self.dimension = dimension
        self.vectors = converted

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, token: str) -> bool:
        return token.lower() in self.vectors

    def get(self, token: str) -> np.ndarray | None:
        return self.vectors.get(token.lower())

    def mean_vector(self, tokens) -> np.ndarray:
        """Mean of the in-vocabulary token vectors; zero vector if none match."""
        hits = [self.vectors[t.lower()] for t in tokens if t.lower() in self.vectors]
        if not hits:
            return np.zeros(self.dimension)
        return np.mean(hits, axis=0)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; 0.0 when either vector is zero, exactly 1.0 for
    identical nonzero vectors."""
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    if np.array_equal(a, b):
        return 1.0
    return float(np.dot(a, b) / (na * nb))


def load_embeddings(path) -> EmbeddingTable:
    """Parse a word-vector text file.

    The first well-formed line fixes the dimension; lines with the wrong
    arity or non-numeric values are skipped (counted in a warning), and a
    repeated token keeps its last occurrence.
    """
    vectors: dict[str, np.ndarray] = {}
    dimension = None
    skipped = 0
    duplicates = 0
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            parts = line.split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            try:
                vec = np.array([float(v) for v in values])
            except ValueError:
                skipped += 1
                continue
            if len(vec) == 0:
                skipped += 1
                continue
            if dimension is None:
                dimension = len(vec)
            if len(vec) != dimension:
                skipped += 1
                continue
            if token.lower() in vectors:
                duplicates += 1
                logger.warning("load_embeddings %s: line %d: duplicate token %r, last wins",
                               path, line_no, token)
            vectors[token.lower()] = vec
    if dimension is None:
        raise ValueError(f"{path}: no valid embedding lines")
    if skipped:
        logger.warning("load_embeddings %s: skipped %d malformed line(s)", path, skipped)
    return EmbeddingTable(dimension, vectors)
