"""Multinomial softmax classifier trained by mini-batch gradient descent.

Three target regimes share one trainer:

* ``hard_majority`` — one-hot majority label per sample.
* ``soft_distribution`` — the empirical annotation distribution per sample.
* ``conditioned`` — one training pair per (sample, annotation), with the
  annotator identity appended to the features as a one-hot block; a single
  model then predicts per-annotator labels.

Training is bit-reproducible for a fixed (corpus, config, kind) on a fixed
kernel backend: epoch shuffles come from the package's SplitMix64 stream
and the optimizer is plain constant-rate gradient descent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .corpus import (
    AnnotationDistribution,
    Corpus,
    LabelSchema,
    build_distribution,
    majority_label,
)
from .errors import ConditioningMismatch, EmptySplit, UnknownAnnotator
from .featurize import FeatureSpace, FeatureVector, featurize
from .rng import SplitMix64

LOG_CLAMP = 1e-12


class TargetKind(Enum):
    HARD_MAJORITY = "hard_majority"
    SOFT_DISTRIBUTION = "soft_distribution"
    CONDITIONED = "conditioned"


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 20
    batch_size: int = 64
    l2: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "l2": self.l2,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)


@dataclass
class SoftmaxClassifier:
    """Dense weights over the hashed feature space plus an optional
    annotator-conditioning block (columns D..D+A-1)."""

    schema: LabelSchema
    space: FeatureSpace
    weights: np.ndarray  # (C, D + A)
    bias: np.ndarray  # (C,)
    annotator_index: tuple[str, ...] = ()

    @property
    def conditioned(self) -> bool:
        return len(self.annotator_index) > 0

    def _check_annotator(self, annotator: str | None) -> int | None:
        if self.conditioned:
            if annotator is None:
                raise ConditioningMismatch("conditioned model needs an annotator id")
            try:
                return self.annotator_index.index(annotator)
            except ValueError:
                raise UnknownAnnotator(annotator) from None
        if annotator is not None:
            raise ConditioningMismatch("model is not annotator-conditioned")
        return None


def _sparse_logits(model: SoftmaxClassifier, features: FeatureVector, a_idx: int | None):
    logits = model.bias.copy()
    if features.indices:
        idx = np.asarray(features.indices, dtype=np.int64)
        val = np.asarray(features.weights, dtype=np.float64)
        logits += model.weights[:, idx] @ val
    if a_idx is not None:
        logits += model.weights[:, model.space.dimension + a_idx]
    return logits


def softmax(logits: np.ndarray) -> np.ndarray:
    e = np.exp(logits - logits.max())
    return e / e.sum()


def predict_distribution(
    model: SoftmaxClassifier, features: FeatureVector, annotator: str | None = None
) -> AnnotationDistribution:
    a_idx = model._check_annotator(annotator)
    q = softmax(_sparse_logits(model, features, a_idx))
    # renormalize away float residue so the distribution invariant holds exactly
    return AnnotationDistribution(tuple(q / q.sum()))


def predict_label(
    model: SoftmaxClassifier, features: FeatureVector, annotator: str | None = None
) -> int:
    return predict_distribution(model, features, annotator).argmax()


def loss_and_gradient(model: SoftmaxClassifier, batch, l2: float = 0.0):
    """Mean cross entropy over the batch plus (l2/2)*||W||^2, with its exact
    analytic gradient. Batch items are (features, target, annotator|None)."""
    if not batch:
        raise ValueError("batch must be non-empty")
    C, total_dim = model.weights.shape
    gW = np.zeros((C, total_dim))
    gb = np.zeros(C)
    loss = 0.0
    for features, target, annotator in batch:
        a_idx = model._check_annotator(annotator)
        q = softmax(_sparse_logits(model, features, a_idx))
        p = target.as_array()
        loss -= float(p @ np.log(np.maximum(q, LOG_CLAMP)))
        diff = q - p
        if features.indices:
            idx = np.asarray(features.indices, dtype=np.int64)
            val = np.asarray(features.weights, dtype=np.float64)
            gW[:, idx] += np.outer(diff, val)
        if a_idx is not None:
            gW[:, model.space.dimension + a_idx] += diff
        gb += diff
    n = len(batch)
    loss = loss / n + 0.5 * l2 * float(np.sum(model.weights**2))
    gW /= n
    gb /= n
    gW += l2 * model.weights
    return loss, (gW, gb)


def _one_hot(index: int, size: int) -> np.ndarray:
    v = np.zeros(size)
    v[index] = 1.0
    return v


def _build_pairs(corpus: Corpus, space: FeatureSpace, kind: TargetKind):
    """Featurize the train split and expand it into (csr, targets) arrays."""
    train = corpus.split("train")
    if not train:
        raise EmptySplit("corpus has no train samples")
    C = len(corpus.schema)
    annotator_index: tuple[str, ...] = ()
    if kind is TargetKind.CONDITIONED:
        annotator_index = tuple(sorted(corpus.annotators))
    ann_pos = {a: i for i, a in enumerate(annotator_index)}

    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    targets: list[np.ndarray] = []
    for sample in train:
        fv = featurize(sample.text, space)
        if kind is TargetKind.CONDITIONED:
            for a in sample.annotations:
                indices.extend(fv.indices)
                data.extend(fv.weights)
                indices.append(space.dimension + ann_pos[a.annotator_id])
                data.append(1.0)
                indptr.append(len(indices))
                targets.append(_one_hot(a.label, C))
        else:
            indices.extend(fv.indices)
            data.extend(fv.weights)
            indptr.append(len(indices))
            if kind is TargetKind.HARD_MAJORITY:
                targets.append(_one_hot(majority_label(sample.annotations, corpus.schema), C))
            else:
                targets.append(build_distribution(sample.annotations, corpus.schema).as_array())
    csr = (
        np.asarray(indptr, dtype=np.int64),
        np.asarray(indices, dtype=np.int64),
        np.asarray(data, dtype=np.float64),
    )
    return csr, np.asarray(targets), annotator_index


def train(
    corpus: Corpus, space: FeatureSpace, kind: TargetKind, config: TrainConfig
) -> SoftmaxClassifier:
    (indptr, indices, data), targets, annotator_index = _build_pairs(corpus, space, kind)
    C = len(corpus.schema)
    W = np.zeros((C, space.dimension + len(annotator_index)))
    b = np.zeros(C)
    n = targets.shape[0]
    rng = SplitMix64(config.seed)
    order = list(range(n))
    for _ in range(config.epochs):
        rng.shuffle(order)
        kernels.sgd_epoch(
            W,
            b,
            indptr,
            indices,
            data,
            targets,
            np.asarray(order, dtype=np.int64),
            config.batch_size,
            config.learning_rate,
            config.l2,
        )
    return SoftmaxClassifier(corpus.schema, space, W, b, annotator_index)


def predict_corpus(model: SoftmaxClassifier, samples) -> list[AnnotationDistribution]:
    """Batch prediction over samples (unconditioned models only)."""
    if model.conditioned:
        raise ConditioningMismatch("batch prediction is for unconditioned models")
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for sample in samples:
        fv = featurize(sample.text, model.space)
        indices.extend(fv.indices)
        data.extend(fv.weights)
        indptr.append(len(indices))
    probs = kernels.forward_probs(
        model.weights,
        model.bias,
        np.asarray(indptr, dtype=np.int64),
        np.asarray(indices, dtype=np.int64),
        np.asarray(data, dtype=np.float64),
    )
    return [AnnotationDistribution(tuple(row / row.sum())) for row in probs]


def _fmt(values: np.ndarray) -> str:
    return "[" + ",".join(format(x, ".17g") for x in values.ravel()) + "]"


def save_model(model: SoftmaxClassifier, path, config: TrainConfig, kind: TargetKind) -> None:
    """Write the model as a single JSON document; parameters are row-major
    decimal floats with 17 significant digits so files are byte-stable."""
    doc = {
        "schema": {"task_id": model.schema.task_id, "labels": list(model.schema.labels)},
        "space": model.space.to_dict(),
        "annotator_index": list(model.annotator_index),
        "kind": kind.value,
        "config": config.to_dict(),
        "weights": "@W@",
        "bias": "@B@",
    }
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    text = text.replace('"@W@"', _fmt(model.weights)).replace('"@B@"', _fmt(model.bias))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")


def load_model(path):
    """Read a model file; returns (model, config, kind)."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    schema = LabelSchema(doc["schema"]["task_id"], tuple(doc["schema"]["labels"]))
    space = FeatureSpace.from_dict(doc["space"])
    annotator_index = tuple(doc["annotator_index"])
    C = len(schema)
    W = np.asarray(doc["weights"], dtype=np.float64).reshape(
        C, space.dimension + len(annotator_index)
    )
    b = np.asarray(doc["bias"], dtype=np.float64)
    model = SoftmaxClassifier(schema, space, W, b, annotator_index)
    return model, TrainConfig.from_dict(doc["config"]), TargetKind(doc["kind"])
