"""Corpus data model: label schemas, annotated samples, and aggregation.

Two dataset shapes are supported on ingestion:

* ``slots`` — k anonymous annotations per sample in fixed column order
  (columns ``label_1..label_k``); annotators get synthetic ids
  ``slot_0..slot_{k-1}``.
* ``identified`` — one column per named annotator; an empty cell means
  that annotator did not label the sample.

The canonical on-disk form is JSONL with one sample per line; labels are
stored by name so files stay readable if the schema is re-ordered.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyAnnotations, MalformedRow, SchemaMismatch

SPLITS = ("train", "validation", "test")


@dataclass(frozen=True)
class LabelSchema:
    """Ordered label set. Order defines label indices for the whole run."""

    task_id: str
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise ValueError("schema needs at least one label")
        if len(set(labels)) != len(labels):
            raise ValueError("label names must be unique")

    def __len__(self) -> int:
        return len(self.labels)

    def index_of(self, name: str) -> int:
        try:
            return self.labels.index(name)
        except ValueError:
            raise SchemaMismatch(name) from None


@dataclass(frozen=True)
class Annotation:
    annotator_id: str
    label: int


@dataclass(frozen=True)
class AnnotatedSample:
    sample_id: str
    text: str
    annotations: tuple[Annotation, ...]
    split: str

    def __post_init__(self):
        object.__setattr__(self, "annotations", tuple(self.annotations))
        if not self.annotations:
            raise ValueError(f"sample {self.sample_id}: needs >=1 annotation")
        ids = [a.annotator_id for a in self.annotations]
        if len(set(ids)) != len(ids):
            raise ValueError(f"sample {self.sample_id}: duplicate annotator ids")
        if self.split not in SPLITS:
            raise ValueError(f"sample {self.sample_id}: bad split {self.split!r}")


@dataclass(frozen=True)
class AnnotationDistribution:
    """Normalized probability vector over the schema's labels."""

    probs: tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if any(p < 0 for p in probs):
            raise ValueError("negative probability")
        if abs(sum(probs) - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {sum(probs)}, not 1")

    def argmax(self) -> int:
        """Index of the largest entry; ties resolved to the lowest index."""
        return int(np.argmax(self.probs))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=np.float64)


@dataclass
class Corpus:
    schema: LabelSchema
    samples: list[AnnotatedSample]
    annotators: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        ids = [s.sample_id for s in self.samples]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate sample ids")
        if not self.annotators:
            self.annotators = self._count_annotators()
        else:
            for s in self.samples:
                for a in s.annotations:
                    if a.annotator_id not in self.annotators:
                        raise ValueError(f"annotator {a.annotator_id} not registered")

    def _count_annotators(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for s in self.samples:
            for a in s.annotations:
                counts[a.annotator_id] = counts.get(a.annotator_id, 0) + 1
        return counts

    def split(self, name: str) -> list[AnnotatedSample]:
        return [s for s in self.samples if s.split == name]


def build_distribution(annotations, schema: LabelSchema) -> AnnotationDistribution:
    """Empirical label distribution: probs[i] = count(label == i) / n."""
    annotations = list(annotations)
    if not annotations:
        raise EmptyAnnotations("cannot build a distribution from zero annotations")
    counts = np.zeros(len(schema), dtype=np.float64)
    for a in annotations:
        counts[a.label] += 1.0
    return AnnotationDistribution(tuple(counts / len(annotations)))


def majority_label(annotations, schema: LabelSchema) -> int:
    """Most frequent label index; ties break to the lowest schema index."""
    annotations = list(annotations)
    if not annotations:
        raise EmptyAnnotations("cannot take a majority of zero annotations")
    counts = [0] * len(schema)
    for a in annotations:
        counts[a.label] += 1
    return counts.index(max(counts))


def _read_split(value: str, row_num: int, default: str | None) -> str:
    value = (value or "").strip()
    if not value:
        if default is None:
            raise MalformedRow("missing split and no default given", row_num)
        return default
    if value not in SPLITS:
        raise MalformedRow(f"unknown split {value!r}", row_num)
    return value


def ingest(path, shape: str, schema: LabelSchema, default_split: str | None = None) -> Corpus:
    """Load a CSV in either dataset shape into a Corpus.

    ``slots`` expects columns ``id,text,split,label_1..label_k``;
    ``identified`` expects ``id,text,split`` plus one column per annotator
    name, blank cells meaning "did not annotate".
    """
    if shape not in ("slots", "identified"):
        raise ValueError(f"unknown shape {shape!r}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for required in ("id", "text"):
            if required not in header:
                raise MalformedRow(f"missing column {required!r} in {path}")
        if shape == "slots":
            label_cols = [c for c in header if c.startswith("label_")]
            label_cols.sort(key=lambda c: int(c.split("_", 1)[1]))
            if not label_cols:
                raise MalformedRow(f"slots shape needs label_1..label_k columns in {path}")
        else:
            label_cols = [c for c in header if c not in ("id", "text", "split")]
            if not label_cols:
                raise MalformedRow(f"identified shape needs annotator columns in {path}")

        samples = []
        for row_num, row in enumerate(reader, start=2):
            text = row.get("text")
            if text is None or text == "":
                raise MalformedRow("missing text", row_num)
            split = _read_split(row.get("split", ""), row_num, default_split)
            annotations = []
            if shape == "slots":
                for k, col in enumerate(label_cols):
                    token = (row.get(col) or "").strip()
                    if not token:
                        continue
                    if token not in schema.labels:
                        raise SchemaMismatch(token, row_num)
                    annotations.append(Annotation(f"slot_{k}", schema.index_of(token)))
            else:
                for col in label_cols:
                    token = (row.get(col) or "").strip()
                    if not token:
                        continue
                    if token not in schema.labels:
                        raise SchemaMismatch(token, row_num)
                    annotations.append(Annotation(col, schema.index_of(token)))
            if not annotations:
                raise MalformedRow("row has no annotations", row_num)
            samples.append(AnnotatedSample(row["id"], text, tuple(annotations), split))
    return Corpus(schema, samples)


def save_jsonl(corpus: Corpus, path) -> None:
    """Write the canonical corpus JSONL (labels by name, UTF-8)."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in corpus.samples:
            record = {
                "id": s.sample_id,
                "text": s.text,
                "split": s.split,
                "annotations": [
                    {"annotator": a.annotator_id, "label": corpus.schema.labels[a.label]}
                    for a in s.annotations
                ],
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_jsonl(path, schema: LabelSchema) -> Corpus:
    """Read the canonical corpus JSONL back into a Corpus."""
    samples = []
    with open(path, encoding="utf-8") as fh:
        for row_num, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            annotations = []
            for a in record["annotations"]:
                token = a["label"]
                if token not in schema.labels:
                    raise SchemaMismatch(token, row_num)
                annotations.append(Annotation(a["annotator"], schema.index_of(token)))
            samples.append(
                AnnotatedSample(record["id"], record["text"], tuple(annotations), record["split"])
            )
    return Corpus(schema, samples)
