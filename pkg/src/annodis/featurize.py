"""Deterministic hashed bag-of-words / char-n-gram featurizer.

Feature index = FNV-1a 64-bit hash of the feature's UTF-8 bytes, modulo the
space dimension. Counts are accumulated per index and L2-normalized, so the
encoding is stateless: no vocabulary, no corpus-level statistics, identical
output on every platform.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass

import numpy as np

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash."""
    h = FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & MASK64
    return h


@dataclass(frozen=True)
class FeatureSpace:
    """Hashing-trick configuration; serialized into every model file."""

    dimension: int = 1 << 18
    ngram_min: int | None = 3
    ngram_max: int | None = 5
    lowercase: bool = True

    def __post_init__(self):
        if self.dimension < 2 or self.dimension & (self.dimension - 1):
            raise ValueError("dimension must be a power of two >= 2")
        if (self.ngram_min is None) != (self.ngram_max is None):
            raise ValueError("ngram_min and ngram_max must both be set or both None")
        if self.ngram_min is not None and self.ngram_min > self.ngram_max:
            raise ValueError("empty n-gram range")

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "ngram_min": self.ngram_min,
            "ngram_max": self.ngram_max,
            "lowercase": self.lowercase,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSpace":
        return cls(d["dimension"], d["ngram_min"], d["ngram_max"], d["lowercase"])


@dataclass(frozen=True)
class FeatureVector:
    """Sparse unit vector (or the zero vector for empty text)."""

    indices: tuple[int, ...]
    weights: tuple[float, ...]
    norm: float

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.indices, self.weights))


def _is_word_char(ch: str) -> bool:
    return ch.isalnum() or unicodedata.category(ch) == "Mn"


def tokenize(text: str, lowercase: bool = True) -> list[str]:
    """Split on maximal runs of non-alphanumeric code points."""
    if lowercase:
        text = text.lower()
    tokens = []
    current = []
    for ch in text:
        if _is_word_char(ch):
            current.append(ch)
        elif current:
            tokens.append("".join(current))
            current = []
    if current:
        tokens.append("".join(current))
    return tokens


def feature_strings(text: str, space: FeatureSpace) -> list[str]:
    """All hashed feature keys for a text: word tokens plus '#'-prefixed
    char n-grams (the prefix keeps the two families from aliasing outside
    of genuine hash collisions)."""
    tokens = tokenize(text, space.lowercase)
    feats = list(tokens)
    if space.ngram_min is not None:
        for token in tokens:
            for n in range(space.ngram_min, space.ngram_max + 1):
                for i in range(len(token) - n + 1):
                    feats.append("#" + token[i : i + n])
    return feats


def featurize(text: str, space: FeatureSpace) -> FeatureVector:
    """Hash all features to indices, accumulate counts, L2-normalize."""
    counts: dict[int, float] = {}
    for feat in feature_strings(text, space):
        idx = fnv1a64(feat.encode("utf-8")) % space.dimension
        counts[idx] = counts.get(idx, 0.0) + 1.0
    if not counts:
        return FeatureVector((), (), 0.0)
    indices = tuple(sorted(counts))
    raw = np.array([counts[i] for i in indices], dtype=np.float64)
    norm = float(np.sqrt(np.sum(raw * raw)))
    return FeatureVector(indices, tuple(raw / norm), 1.0)
