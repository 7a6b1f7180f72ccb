"""annodis: train and evaluate text classifiers against the full
distribution of annotator labels instead of a single majority label."""

from .corpus import (
    AnnotatedSample,
    Annotation,
    AnnotationDistribution,
    Corpus,
    LabelSchema,
    build_distribution,
    ingest,
    load_jsonl,
    majority_label,
    save_jsonl,
)
from .featurize import FeatureSpace, FeatureVector, featurize, tokenize
from .model import (
    SoftmaxClassifier,
    TargetKind,
    TrainConfig,
    load_model,
    loss_and_gradient,
    predict_distribution,
    predict_label,
    save_model,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotatedSample",
    "Annotation",
    "AnnotationDistribution",
    "Corpus",
    "FeatureSpace",
    "FeatureVector",
    "LabelSchema",
    "SoftmaxClassifier",
    "TargetKind",
    "TrainConfig",
    "build_distribution",
    "featurize",
    "ingest",
    "load_jsonl",
    "load_model",
    "loss_and_gradient",
    "majority_label",
    "predict_distribution",
    "predict_label",
    "save_jsonl",
    "save_model",
    "tokenize",
    "train",
]
