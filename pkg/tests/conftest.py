import pytest

from annodis.corpus import AnnotatedSample, Annotation, Corpus, LabelSchema

HATE = LabelSchema("hate", ("Hate", "Offensive", "Normal"))
ABUSE = LabelSchema(
    "abuse",
    ("Not abusive", "Ambiguous", "Mildly abusive", "Strongly abusive", "Very strongly abusive"),
)


def ann(labels, prefix="slot"):
    return tuple(Annotation(f"{prefix}_{i}", lab) for i, lab in enumerate(labels))


@pytest.fixture
def hate_schema():
    return HATE


@pytest.fixture
def abuse_schema():
    return ABUSE


def make_toy_corpus():
    """Two cleanly separable classes over distinct vocabularies."""
    samples = []
    good = ["lovely sunny day", "pleasant walk outside", "great match today", "wonderful fun show"]
    bad = ["you are idiot", "total idiot move", "shut up idiot", "idiot clown nonsense"]
    for i, text in enumerate(good):
        samples.append(AnnotatedSample(f"g{i}", text, ann([2, 2, 2]), "train"))
    for i, text in enumerate(bad):
        samples.append(AnnotatedSample(f"b{i}", text, ann([1, 1, 1]), "train"))
    samples.append(AnnotatedSample("gv", "sunny pleasant day", ann([2, 2, 2]), "validation"))
    samples.append(AnnotatedSample("bv", "you idiot", ann([1, 1, 1]), "validation"))
    samples.append(AnnotatedSample("gt", "fun day today", ann([2, 2, 2]), "test"))
    samples.append(AnnotatedSample("bt", "idiot clown", ann([1, 1, 1]), "test"))
    return Corpus(HATE, samples)


@pytest.fixture
def toy_corpus():
    return make_toy_corpus()
