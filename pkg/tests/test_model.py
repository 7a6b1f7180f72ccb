import math

import numpy as np
import pytest

from annodis.corpus import AnnotatedSample, AnnotationDistribution, Corpus
from annodis.errors import ConditioningMismatch, EmptySplit, UnknownAnnotator
from annodis.featurize import FeatureSpace, FeatureVector, featurize
from annodis.model import (
    SoftmaxClassifier,
    TargetKind,
    TrainConfig,
    load_model,
    loss_and_gradient,
    predict_corpus,
    predict_distribution,
    predict_label,
    save_model,
    train,
)

from conftest import HATE, ann

TINY_SPACE = FeatureSpace(8, None, None, True)


def make_model(weights, bias, space=TINY_SPACE, annotators=()):
    return SoftmaxClassifier(HATE, space, np.asarray(weights, float), np.asarray(bias, float), annotators)


def zero_model(dim=8, annotators=()):
    total = dim + len(annotators)
    space = FeatureSpace(dim, None, None, True)
    return SoftmaxClassifier(HATE, space, np.zeros((3, total)), np.zeros(3), annotators)


def fv(entries: dict[int, float]) -> FeatureVector:
    idx = tuple(sorted(entries))
    return FeatureVector(idx, tuple(entries[i] for i in idx), 1.0)


class TestPredictDistribution:
    def test_zero_parameters_uniform(self):
        q = predict_distribution(zero_model(), fv({0: 1.0}))
        assert q.probs == pytest.approx((1 / 3, 1 / 3, 1 / 3))

    def test_closed_form_logits(self):
        model = zero_model()
        model.bias = np.array([math.log(2.0), 0.0, 0.0])
        q = predict_distribution(model, fv({}))
        assert q.probs == pytest.approx((0.5, 0.25, 0.25), abs=1e-12)

    def test_no_overflow_on_huge_logits(self):
        model = zero_model()
        model.bias = np.array([1000.0, 0.0, 0.0])
        q = predict_distribution(model, fv({}))
        assert q.probs[0] == pytest.approx(1.0)
        assert all(np.isfinite(q.probs))

    def test_conditioning_mismatch(self):
        with pytest.raises(ConditioningMismatch):
            predict_distribution(zero_model(), fv({}), annotator="a")
        with pytest.raises(ConditioningMismatch):
            predict_distribution(zero_model(annotators=("a",)), fv({}))

    def test_unknown_annotator(self):
        with pytest.raises(UnknownAnnotator):
            predict_distribution(zero_model(annotators=("a",)), fv({}), annotator="b")

    def test_sums_to_one_for_large_random_parameters(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            model = zero_model()
            model.weights = rng.uniform(-1e3, 1e3, size=(3, 8))
            model.bias = rng.uniform(-1e3, 1e3, size=3)
            q = predict_distribution(model, fv({0: 0.6, 3: 0.8}))
            assert abs(sum(q.probs) - 1.0) <= 1e-9


class TestPredictLabel:
    def test_uniform_tie_goes_to_zero(self):
        assert predict_label(zero_model(), fv({1: 1.0})) == 0

    def test_argmax(self):
        model = zero_model()
        model.bias = np.array([math.log(2.0), 0.0, 0.0])
        assert predict_label(model, fv({})) == 0
        model.bias = np.array([0.2, 0.3, 0.5])
        assert predict_label(model, fv({})) == 2


def finite_difference_grad(model, batch, l2, h=1e-5):
    """Central-difference gradient oracle over all parameters."""
    gW = np.zeros_like(model.weights)
    gb = np.zeros_like(model.bias)
    for arr, grad in ((model.weights, gW), (model.bias, gb)):
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            i = it.multi_index
            orig = arr[i]
            arr[i] = orig + h
            up, _ = loss_and_gradient(model, batch, l2)
            arr[i] = orig - h
            down, _ = loss_and_gradient(model, batch, l2)
            arr[i] = orig
            grad[i] = (up - down) / (2 * h)
    return gW, gb


def random_instance(rng, conditioned=False):
    annotators = ("u", "v") if conditioned else ()
    space = FeatureSpace(4, None, None, True)
    model = SoftmaxClassifier(
        HATE,
        space,
        rng.normal(size=(3, 4 + len(annotators))),
        rng.normal(size=3),
        annotators,
    )
    batch = []
    for _ in range(4):
        raw = rng.uniform(0.1, 1.0, size=3)
        target = AnnotationDistribution(tuple(raw / raw.sum()))
        entries = {int(i): float(rng.normal()) for i in rng.choice(4, size=2, replace=False)}
        annotator = annotators[rng.integers(len(annotators))] if conditioned else None
        batch.append((fv(entries), target, annotator))
    return model, batch


class TestGradient:
    @pytest.mark.parametrize("conditioned", [False, True])
    def test_matches_finite_differences(self, conditioned):
        rng = np.random.default_rng(42 + conditioned)
        for _ in range(10):
            model, batch = random_instance(rng, conditioned)
            l2 = float(rng.uniform(0, 0.1))
            _, (gW, gb) = loss_and_gradient(model, batch, l2)
            fW, fb = finite_difference_grad(model, batch, l2)
            scale = max(np.abs(fW).max(), np.abs(fb).max(), 1.0)
            assert np.abs(gW - fW).max() / scale < 1e-5
            assert np.abs(gb - fb).max() / scale < 1e-5

    def test_target_equals_output_gives_entropy(self):
        model = zero_model()
        target = AnnotationDistribution((1 / 3, 1 / 3, 1 / 3))
        loss, _ = loss_and_gradient(model, [(fv({}), target, None)])
        assert loss == pytest.approx(math.log(3.0))

    def test_one_hot_target_is_log_loss(self):
        model = zero_model()
        model.bias = np.array([math.log(2.0), 0.0, 0.0])
        target = AnnotationDistribution((1.0, 0.0, 0.0))
        loss, _ = loss_and_gradient(model, [(fv({}), target, None)])
        assert loss == pytest.approx(-math.log(0.5))


def bias_only_corpus():
    """Empty texts make every feature vector zero, so only the bias trains."""
    rows = [
        ("a", [0, 0, 1]),
        ("b", [0, 1, 2]),
        ("c", [2, 2, 2]),
        ("d", [0, 2, 2]),
        ("e", [1, 1, 0]),
    ]
    samples = [AnnotatedSample(sid, "", ann(labels), "train") for sid, labels in rows]
    return Corpus(HATE, samples)


class TestTrain:
    def test_bias_only_soft_converges_to_mean_target(self):
        from annodis.corpus import build_distribution

        corpus = bias_only_corpus()
        config = TrainConfig(learning_rate=0.5, epochs=400, batch_size=5, l2=0.0, seed=1)
        model = train(corpus, TINY_SPACE, TargetKind.SOFT_DISTRIBUTION, config)
        q = predict_distribution(model, fv({})).as_array()
        mean_target = np.mean(
            [build_distribution(s.annotations, HATE).as_array() for s in corpus.samples], axis=0
        )
        assert np.abs(q - mean_target).sum() < 1e-3

    def test_same_seed_identical_parameters(self, toy_corpus):
        config = TrainConfig(seed=123)
        space = FeatureSpace(1 << 10)
        a = train(toy_corpus, space, TargetKind.SOFT_DISTRIBUTION, config)
        b = train(toy_corpus, space, TargetKind.SOFT_DISTRIBUTION, config)
        assert np.array_equal(a.weights, b.weights)
        assert np.array_equal(a.bias, b.bias)

    def test_separable_toy_reaches_full_train_accuracy(self, toy_corpus):
        # brute-force separability check: the two classes share no tokens
        from annodis.featurize import tokenize

        good = set()
        bad = set()
        for s in toy_corpus.split("train"):
            target = good if s.annotations[0].label == 2 else bad
            target.update(tokenize(s.text))
        assert not good & bad

        space = FeatureSpace(1 << 10)
        model = train(toy_corpus, space, TargetKind.HARD_MAJORITY, TrainConfig(seed=5))
        hits = sum(
            predict_label(model, featurize(s.text, space)) == s.annotations[0].label
            for s in toy_corpus.split("train")
        )
        assert hits == len(toy_corpus.split("train"))

    def test_empty_train_split_raises(self):
        corpus = Corpus(HATE, [AnnotatedSample("x", "hi", ann([0]), "test")])
        with pytest.raises(EmptySplit):
            train(corpus, TINY_SPACE, TargetKind.HARD_MAJORITY, TrainConfig())

    def test_full_batch_loss_non_increasing(self):
        corpus = bias_only_corpus()
        from annodis.corpus import build_distribution

        targets = [
            (fv({}), build_distribution(s.annotations, HATE), None) for s in corpus.samples
        ]
        losses = []
        for epochs in range(1, 12):
            config = TrainConfig(learning_rate=0.3, epochs=epochs, batch_size=5, l2=0.0, seed=1)
            model = train(corpus, TINY_SPACE, TargetKind.SOFT_DISTRIBUTION, config)
            loss, _ = loss_and_gradient(model, targets)
            losses.append(loss)
        assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))

    def test_conditioned_single_annotator_matches_unconditioned_argmax(self):
        texts = ["good sunny day", "bad idiot words", "fine nice walk", "awful idiot stuff"]
        labels = [2, 1, 2, 1]
        samples = [
            AnnotatedSample(f"s{i}", t, (ann([lab], prefix="only")), "train")
            for i, (t, lab) in enumerate(zip(texts, labels))
        ]
        corpus = Corpus(HATE, samples)
        space = FeatureSpace(1 << 10)
        config = TrainConfig(seed=9)
        cond = train(corpus, space, TargetKind.CONDITIONED, config)
        uncond = train(corpus, space, TargetKind.HARD_MAJORITY, config)
        for text in texts + ["sunny walk", "idiot"]:
            f = featurize(text, space)
            assert predict_label(cond, f, "only_0") == predict_label(uncond, f)

    def test_conditioned_expands_pairs(self):
        samples = [AnnotatedSample("s", "hello there", ann([0, 1, 2]), "train")]
        corpus = Corpus(HATE, samples)
        model = train(corpus, TINY_SPACE, TargetKind.CONDITIONED, TrainConfig(epochs=1))
        assert model.annotator_index == ("slot_0", "slot_1", "slot_2")


class TestModelFile:
    def test_round_trip(self, toy_corpus, tmp_path):
        space = FeatureSpace(1 << 10)
        config = TrainConfig(seed=3)
        model = train(toy_corpus, space, TargetKind.SOFT_DISTRIBUTION, config)
        path = tmp_path / "model.json"
        save_model(model, path, config, TargetKind.SOFT_DISTRIBUTION)
        loaded, loaded_config, kind = load_model(path)
        assert np.array_equal(loaded.weights, model.weights)
        assert np.array_equal(loaded.bias, model.bias)
        assert loaded.schema == model.schema
        assert loaded.space == model.space
        assert loaded_config == config
        assert kind is TargetKind.SOFT_DISTRIBUTION

    def test_byte_stable(self, toy_corpus, tmp_path):
        space = FeatureSpace(1 << 10)
        config = TrainConfig(seed=3)
        for name in ("a.json", "b.json"):
            model = train(toy_corpus, space, TargetKind.HARD_MAJORITY, config)
            save_model(model, tmp_path / name, config, TargetKind.HARD_MAJORITY)
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_predict_corpus_matches_single_predictions(toy_corpus):
    space = FeatureSpace(1 << 10)
    model = train(toy_corpus, space, TargetKind.SOFT_DISTRIBUTION, TrainConfig(seed=2))
    test = toy_corpus.split("test")
    batched = predict_corpus(model, test)
    for sample, q in zip(test, batched):
        single = predict_distribution(model, featurize(sample.text, space))
        assert np.allclose(q.as_array(), single.as_array(), atol=1e-12)
