"""Per-annotator ensemble: one sub-model per label stream, top-n selection
by validation accuracy, hard argmax votes aggregated into a distribution.

Streams come in two flavours. ``identified`` corpora give one stream per
real annotator. ``slots`` corpora have anonymous positional annotations,
so stream k is "the k-th annotation of every sample" — a documented
approximation that mixes annotators.

A trained annotator-conditioned classifier can also be wrapped into
"virtual" sub-model records (one per annotator) so the same top-n
selection and vote aggregation machinery applies to it.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from .corpus import (
    AnnotatedSample,
    Annotation,
    AnnotationDistribution,
    Corpus,
    build_distribution,
)
from .errors import EmptyVotes, InvalidSelection
from .evalstats import evaluate
from .featurize import FeatureSpace, FeatureVector, featurize, fnv1a64
from .model import SoftmaxClassifier, TargetKind, TrainConfig, predict_label, train

log = logging.getLogger(__name__)

MIN_SELECTION = 3  # top-n selection requires n >= 3


@dataclass
class LabelStream:
    """One annotator's (or slot's) labels, keyed by split."""

    stream_id: str
    pairs: dict[str, list[tuple[str, int]]] = field(default_factory=dict)

    def split(self, name: str) -> list[tuple[str, int]]:
        return self.pairs.get(name, [])

    def size(self) -> int:
        return sum(len(v) for v in self.pairs.values())


@dataclass
class VirtualSubModel:
    """A single-annotator view into a conditioned classifier."""

    base: SoftmaxClassifier
    annotator_id: str

    def vote(self, features: FeatureVector) -> int:
        return predict_label(self.base, features, self.annotator_id)


@dataclass
class SubModelRecord:
    stream_id: str
    model: SoftmaxClassifier | VirtualSubModel
    validation_accuracy: float

    def vote(self, features: FeatureVector) -> int:
        if isinstance(self.model, VirtualSubModel):
            return self.model.vote(features)
        return predict_label(self.model, features)


@dataclass
class EnsembleModel:
    records: list[SubModelRecord]
    n: int


def build_streams(corpus: Corpus, mode: str) -> list[LabelStream]:
    """Split a corpus into per-annotator or per-slot label streams.

    Streams with no training pairs are dropped with a warning; they cannot
    produce a sub-model.
    """
    if mode not in ("identified", "slots"):
        raise ValueError(f"unknown stream mode {mode!r}")
    streams: dict[str, LabelStream] = {}
    if mode == "identified":
        for annotator in sorted(corpus.annotators):
            streams[annotator] = LabelStream(annotator)
        for sample in corpus.samples:
            for a in sample.annotations:
                streams[a.annotator_id].pairs.setdefault(sample.split, []).append(
                    (sample.sample_id, a.label)
                )
    else:
        width = max(len(s.annotations) for s in corpus.samples)
        for k in range(width):
            streams[f"slot_{k}"] = LabelStream(f"slot_{k}")
        for sample in corpus.samples:
            for k, a in enumerate(sample.annotations):
                streams[f"slot_{k}"].pairs.setdefault(sample.split, []).append(
                    (sample.sample_id, a.label)
                )
    kept = []
    for stream in streams.values():
        if not stream.split("train"):
            log.warning("stream %s has no training pairs; excluded", stream.stream_id)
            continue
        kept.append(stream)
    return kept


def _stream_corpus(corpus: Corpus, stream: LabelStream) -> Corpus:
    """A corpus whose sole annotation per sample is the stream's label."""
    texts = {s.sample_id: s for s in corpus.samples}
    samples = []
    for split, pairs in stream.pairs.items():
        for sample_id, label in pairs:
            samples.append(
                AnnotatedSample(
                    sample_id,
                    texts[sample_id].text,
                    (Annotation(stream.stream_id, label),),
                    split,
                )
            )
    return Corpus(corpus.schema, samples)


def _stream_seed(base_seed: int, stream_id: str) -> int:
    return (base_seed ^ fnv1a64(stream_id.encode("utf-8"))) & ((1 << 64) - 1)


def _validation_accuracy(vote_fn, corpus: Corpus, pairs, space: FeatureSpace) -> float:
    if not pairs:
        log.warning("no validation pairs; accuracy recorded as 0.0")
        return 0.0
    texts = {s.sample_id: s.text for s in corpus.samples}
    hits = 0
    for sample_id, label in pairs:
        fv = featurize(texts[sample_id], space)
        if vote_fn(fv) == label:
            hits += 1
    return hits / len(pairs)


def train_ensemble(
    corpus: Corpus, space: FeatureSpace, config: TrainConfig, mode: str
) -> list[SubModelRecord]:
    """Train one hard-target sub-model per stream, scored on its own
    validation pairs. Per-stream seeds are seed XOR fnv1a64(stream_id)."""
    streams = build_streams(corpus, mode)
    records = []
    for stream in sorted(streams, key=lambda s: s.stream_id):
        sub_config = TrainConfig(
            config.learning_rate,
            config.epochs,
            config.batch_size,
            config.l2,
            _stream_seed(config.seed, stream.stream_id),
        )
        sub_model = train(_stream_corpus(corpus, stream), space, TargetKind.HARD_MAJORITY, sub_config)
        accuracy = _validation_accuracy(
            lambda fv: predict_label(sub_model, fv), corpus, stream.split("validation"), space
        )
        records.append(SubModelRecord(stream.stream_id, sub_model, accuracy))
    return records


def virtual_records(
    base: SoftmaxClassifier, corpus: Corpus, space: FeatureSpace
) -> list[SubModelRecord]:
    """Wrap a conditioned classifier as one virtual sub-model per annotator,
    scored on that annotator's own validation annotations."""
    streams = build_streams(corpus, "identified")
    records = []
    for stream in sorted(streams, key=lambda s: s.stream_id):
        if stream.stream_id not in base.annotator_index:
            continue
        virtual = VirtualSubModel(base, stream.stream_id)
        accuracy = _validation_accuracy(virtual.vote, corpus, stream.split("validation"), space)
        records.append(SubModelRecord(stream.stream_id, virtual, accuracy))
    return records


def select_top_n(records: list[SubModelRecord], n: int) -> EnsembleModel:
    """Keep the n records with highest validation accuracy; accuracy ties
    break to the lexicographically smaller stream id."""
    if n < MIN_SELECTION or n > len(records):
        raise InvalidSelection(f"n must be in [{MIN_SELECTION}, {len(records)}], got {n}")
    ranked = sorted(records, key=lambda r: (-r.validation_accuracy, r.stream_id))
    return EnsembleModel(ranked[:n], n)


def aggregate(votes, schema) -> AnnotationDistribution:
    """Normalized vote counts: probs[i] = count(votes == i) / len(votes)."""
    votes = list(votes)
    if not votes:
        raise EmptyVotes("cannot aggregate zero votes")
    return build_distribution([Annotation(str(i), v) for i, v in enumerate(votes)], schema)


def predict(ensemble: EnsembleModel, text: str, space: FeatureSpace) -> AnnotationDistribution:
    fv = featurize(text, space)
    schema = _record_schema(ensemble.records[0])
    return aggregate([r.vote(fv) for r in ensemble.records], schema)


def _record_schema(record: SubModelRecord):
    model = record.model.base if isinstance(record.model, VirtualSubModel) else record.model
    return model.schema


def sweep_top_n(
    records: list[SubModelRecord], corpus: Corpus, n_range: tuple[int, int], space: FeatureSpace
) -> list[tuple[int, float]]:
    """Mean test cross entropy of the top-n ensemble for each n in the range
    (inclusive); the data behind the top-n comparison plots."""
    lo, hi = n_range
    if lo < MIN_SELECTION or hi > len(records) or lo > hi:
        raise InvalidSelection(f"range {n_range} outside [{MIN_SELECTION}, {len(records)}]")
    test = corpus.split("test")
    rows = []
    for n in range(lo, hi + 1):
        ensemble = select_top_n(records, n)
        preds = [predict(ensemble, s.text, space) for s in test]
        report = evaluate(preds, test, corpus.schema)
        rows.append((n, report.mean))
    return rows


def save_manifest(records: list[SubModelRecord], model_paths: dict[str, str], n: int, path) -> None:
    doc = {
        "streams": [
            {
                "stream_id": r.stream_id,
                "model_path": model_paths[r.stream_id],
                "validation_accuracy": r.validation_accuracy,
            }
            for r in records
        ],
        "selected_n": n,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_manifest(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
