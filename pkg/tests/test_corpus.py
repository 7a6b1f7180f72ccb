from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from annodis.corpus import (
    AnnotatedSample,
    Annotation,
    Corpus,
    LabelSchema,
    build_distribution,
    ingest,
    load_jsonl,
    majority_label,
    save_jsonl,
)
from annodis.errors import EmptyAnnotations, MalformedRow, SchemaMismatch

from conftest import HATE, ann

FIXTURES = str(Path(__file__).resolve().parent.parent / "fixtures")


class TestBuildDistribution:
    def test_counts(self):
        d = build_distribution(ann([0, 0, 1, 2, 0]), HATE)
        assert d.probs == (0.6, 0.2, 0.2)

    def test_one_hot(self):
        d = build_distribution(ann([2]), HATE)
        assert d.probs == (0.0, 0.0, 1.0)

    def test_empty_raises(self):
        with pytest.raises(EmptyAnnotations):
            build_distribution([], HATE)


class TestMajorityLabel:
    def test_strict_majority(self):
        assert majority_label(ann([0, 0, 0, 1, 2]), HATE) == 0

    def test_tie_breaks_to_lowest_index(self):
        assert majority_label(ann([0, 0, 1, 1, 2]), HATE) == 0
        assert majority_label(ann([2, 2, 1, 1]), HATE) == 1

    def test_empty_raises(self):
        with pytest.raises(EmptyAnnotations):
            majority_label([], HATE)


@given(st.lists(st.integers(min_value=0, max_value=2), min_size=1, max_size=12))
def test_distribution_argmax_equals_majority(labels):
    annotations = ann(labels)
    assert build_distribution(annotations, HATE).argmax() == majority_label(annotations, HATE)


@given(st.lists(st.integers(min_value=0, max_value=2), min_size=1, max_size=12))
def test_distribution_invariants(labels):
    d = build_distribution(ann(labels), HATE)
    assert all(p >= 0 for p in d.probs)
    assert abs(sum(d.probs) - 1.0) <= 1e-9


class TestSchema:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            LabelSchema("t", ())

    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            LabelSchema("t", ("A", "A"))

    def test_index_of_unknown(self):
        with pytest.raises(SchemaMismatch):
            HATE.index_of("Hateful")


class TestIngest:
    def test_slots_shape(self):
        corpus = ingest(f"{FIXTURES}/hate_slots.csv", "slots", HATE)
        assert len(corpus.samples) == 8
        first = corpus.samples[0]
        assert [a.annotator_id for a in first.annotations] == [f"slot_{k}" for k in range(5)]
        assert corpus.annotators == {f"slot_{k}": 8 for k in range(5)}

    def test_identified_shape(self, abuse_schema):
        corpus = ingest(f"{FIXTURES}/abuse_identified.csv", "identified", abuse_schema)
        by_id = {s.sample_id: s for s in corpus.samples}
        assert len(by_id["c001"].annotations) == 3
        assert {a.annotator_id for a in by_id["c001"].annotations} == {"anna", "ben", "carol"}
        assert len(corpus.annotators) == 8

    def test_unknown_label_token(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("id,text,split,label_1\nx,hello,train,Hateful\n")
        with pytest.raises(SchemaMismatch):
            ingest(path, "slots", HATE)

    def test_missing_text(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("id,text,split,label_1\nx,,train,Hate\n")
        with pytest.raises(MalformedRow):
            ingest(path, "slots", HATE)

    def test_default_split(self, tmp_path):
        path = tmp_path / "nosplit.csv"
        path.write_text("id,text,split,label_1\nx,hello,,Hate\n")
        corpus = ingest(path, "slots", HATE, default_split="train")
        assert corpus.samples[0].split == "train"


def test_jsonl_round_trip(tmp_path, abuse_schema):
    corpus = ingest(f"{FIXTURES}/abuse_identified.csv", "identified", abuse_schema)
    path = tmp_path / "corpus.jsonl"
    save_jsonl(corpus, path)
    again = load_jsonl(path, abuse_schema)
    assert again.samples == corpus.samples
    assert again.annotators == corpus.annotators
    # re-serialization is byte-identical
    path2 = tmp_path / "again.jsonl"
    save_jsonl(again, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_corpus_rejects_duplicate_sample_ids():
    s = AnnotatedSample("x", "hi", ann([0]), "train")
    with pytest.raises(ValueError):
        Corpus(HATE, [s, s])


def test_sample_rejects_duplicate_annotators():
    with pytest.raises(ValueError):
        AnnotatedSample("x", "hi", (Annotation("a", 0), Annotation("a", 1)), "train")
