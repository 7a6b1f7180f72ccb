"""Seeded synthetic corpus generator for benchmarks and property tests.

Each sample has a latent true class; its text is drawn mostly from a
class-specific vocabulary (so hashed features are informative) plus shared
filler tokens. Every annotator labels every sample through their own
confusion matrix, which produces realistic disagreement: the annotation
distribution of a sample concentrates on the true class but spreads
probability onto its neighbours.
"""

from __future__ import annotations

import numpy as np

from .corpus import AnnotatedSample, Annotation, Corpus, LabelSchema
from .rng import SplitMix64

DEFAULT_SCHEMA = LabelSchema("synthetic", ("alpha", "beta", "gamma"))

# Rows: true class, columns: assigned label. Five annotators with distinct
# reliability and bias profiles; all favour the true class.
CONFUSIONS = np.array(
    [
        [[0.80, 0.10, 0.10], [0.15, 0.70, 0.15], [0.10, 0.10, 0.80]],
        [[0.70, 0.20, 0.10], [0.10, 0.80, 0.10], [0.15, 0.15, 0.70]],
        [[0.75, 0.05, 0.20], [0.20, 0.65, 0.15], [0.05, 0.15, 0.80]],
        [[0.65, 0.25, 0.10], [0.15, 0.75, 0.10], [0.10, 0.20, 0.70]],
        [[0.70, 0.15, 0.15], [0.05, 0.85, 0.10], [0.20, 0.10, 0.70]],
    ]
)

CLASS_PRIORS = (0.4, 0.35, 0.25)
VOCAB_PER_CLASS = 40
SHARED_VOCAB = 30
TOKENS_PER_TEXT = 10
CLASS_TOKEN_SHARE = 0.7
SPLIT_FRACTIONS = {"train": 0.7, "validation": 0.15, "test": 0.15}


def _pick(rng: SplitMix64, cumulative: list[float]) -> int:
    u = rng.uniform()
    for i, edge in enumerate(cumulative):
        if u < edge:
            return i
    return len(cumulative) - 1


def _cumulative(probs) -> list[float]:
    edges, acc = [], 0.0
    for p in probs:
        acc += p
        edges.append(acc)
    return edges


def generate_corpus(
    n_samples: int = 5000,
    seed: int = 0,
    schema: LabelSchema = DEFAULT_SCHEMA,
    confusions: np.ndarray = CONFUSIONS,
) -> Corpus:
    if confusions.shape[1:] != (len(schema), len(schema)):
        raise ValueError("confusion matrices must be square in the schema size")
    rng = SplitMix64(seed)
    n_annotators = confusions.shape[0]
    prior_edges = _cumulative(CLASS_PRIORS)
    confusion_edges = [
        [_cumulative(confusions[a, c]) for c in range(len(schema))] for a in range(n_annotators)
    ]
    n_class_tokens = round(TOKENS_PER_TEXT * CLASS_TOKEN_SHARE)

    boundaries = []
    acc = 0.0
    for name in ("train", "validation", "test"):
        acc += SPLIT_FRACTIONS[name]
        boundaries.append((round(acc * n_samples), name))

    samples = []
    for i in range(n_samples):
        true_class = _pick(rng, prior_edges)
        tokens = []
        for _ in range(n_class_tokens):
            tokens.append(f"c{true_class}w{rng.randbelow(VOCAB_PER_CLASS)}")
        for _ in range(TOKENS_PER_TEXT - n_class_tokens):
            tokens.append(f"shared{rng.randbelow(SHARED_VOCAB)}")
        annotations = tuple(
            Annotation(f"ann_{a}", _pick(rng, confusion_edges[a][true_class]))
            for a in range(n_annotators)
        )
        split = next(name for edge, name in boundaries if i < edge)
        samples.append(AnnotatedSample(f"s{i:05d}", " ".join(tokens), annotations, split))
    return Corpus(schema, samples)
