"""Evaluation statistics: cross entropy against annotation distributions,
and the per-category exact binomial preference test for survey tallies.

All entropies are in nats. The preference test treats each of the three
survey choices (baseline / multi-label / no difference) as its own
one-sided exact binomial test against a uniform null of 1/3.
"""

from __future__ import annotations

import json
import math
import operator
from dataclasses import dataclass

import numpy as np

from .corpus import AnnotationDistribution, LabelSchema, build_distribution, majority_label
from .errors import AlignmentError, DimensionMismatch, DomainError

LOG_CLAMP = 1e-12


def cross_entropy(p: AnnotationDistribution, q: AnnotationDistribution) -> float:
    """-sum(p_i * ln(max(q_i, 1e-12)))."""
    pa, qa = p.as_array(), q.as_array()
    if pa.shape != qa.shape:
        raise DimensionMismatch(f"lengths {pa.shape[0]} vs {qa.shape[0]}")
    return float(-(pa @ np.log(np.maximum(qa, LOG_CLAMP))))


def entropy(p: AnnotationDistribution) -> float:
    return cross_entropy(p, p)


@dataclass
class EvalReport:
    per_sample: list[tuple[str, float]]
    mean: float
    accuracy_vs_majority: float

    def to_dict(self) -> dict:
        return {
            "per_sample": [{"sample_id": sid, "cross_entropy": ce} for sid, ce in self.per_sample],
            "mean_cross_entropy": self.mean,
            "accuracy_vs_majority": self.accuracy_vs_majority,
        }


def evaluate(predictions, samples, schema: LabelSchema) -> EvalReport:
    """Score predicted distributions against each sample's annotation
    distribution. ``predictions`` is either a list parallel to ``samples``
    or a dict keyed by sample_id."""
    if isinstance(predictions, dict):
        aligned = []
        for s in samples:
            if s.sample_id not in predictions:
                raise AlignmentError(f"no prediction for sample {s.sample_id}")
            aligned.append(predictions[s.sample_id])
    else:
        aligned = list(predictions)
        if len(aligned) != len(samples):
            raise AlignmentError(f"{len(aligned)} predictions for {len(samples)} samples")
    samples = list(samples)
    per_sample = []
    hits = 0
    for s, q in zip(samples, aligned):
        p = build_distribution(s.annotations, schema)
        per_sample.append((s.sample_id, cross_entropy(p, q)))
        if q.argmax() == majority_label(s.annotations, schema):
            hits += 1
    if not samples:
        raise AlignmentError("no samples to evaluate")
    mean = sum(ce for _, ce in per_sample) / len(per_sample)
    return EvalReport(per_sample, mean, hits / len(samples))


def _log_binom_pmf(i: int, n: int, log_p: float, log_q: float) -> float:
    return (
        math.lgamma(n + 1)
        - math.lgamma(i + 1)
        - math.lgamma(n - i + 1)
        + i * log_p
        + (n - i) * log_q
    )


def _tail_sum(lo: int, hi: int, n: int, p0: float) -> float:
    """Sum of Binomial(n, p0) pmf over [lo, hi], in log-space."""
    log_p = math.log(p0)
    log_q = math.log1p(-p0)
    terms = [_log_binom_pmf(i, n, log_p, log_q) for i in range(lo, hi + 1)]
    m = max(terms)
    return math.exp(m) * math.fsum(math.exp(t - m) for t in terms)


def binomial_pvalue(k: int, n: int, p0: float) -> float:
    """Exact one-sided upper-tail p-value P(X >= k), X ~ Binomial(n, p0).

    The smaller-probability tail is always the one summed directly, so
    the result carries no subtractive cancellation: below the mean the
    lower tail is summed and complemented, above it the upper tail is
    summed as is.
    """
    try:
        k, n = int(operator.index(k)), int(operator.index(n))
    except TypeError:
        raise DomainError("k and n must be integers") from None
    if k < 0 or k > n or n < 1:
        raise DomainError(f"need 0 <= k <= n, got k={k}, n={n}")
    if not 0.0 < p0 < 1.0:
        raise DomainError(f"need 0 < p0 < 1, got {p0}")
    if k == 0:
        return 1.0
    if k <= n * p0:
        return min(1.0, max(0.0, 1.0 - _tail_sum(0, k - 1, n, p0)))
    return min(1.0, _tail_sum(k, n, n, p0))


@dataclass
class PreferenceCounts:
    baseline: int
    multi_label: int
    no_difference: int

    def __post_init__(self):
        if min(self.baseline, self.multi_label, self.no_difference) < 0:
            raise DomainError("counts must be non-negative")

    @property
    def total(self) -> int:
        return self.baseline + self.multi_label + self.no_difference


CATEGORIES = ("baseline", "multi_label", "no_difference")


@dataclass
class TestResult:
    per_category: list[tuple[float, float]]  # (proportion, p_value) per category
    counts: PreferenceCounts
    null_prob: float = 1.0 / 3.0

    def to_dict(self) -> dict:
        return {
            "null_prob": self.null_prob,
            "categories": [
                {
                    "name": name,
                    "count": count,
                    "proportion": prop,
                    "p_value": p,
                }
                for name, count, (prop, p) in zip(
                    CATEGORIES,
                    (self.counts.baseline, self.counts.multi_label, self.counts.no_difference),
                    self.per_category,
                )
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def preference_test(counts: PreferenceCounts, null_prob: float = 1.0 / 3.0) -> TestResult:
    """Per-category proportion and one-sided exact binomial p-value."""
    total = counts.total
    if total == 0:
        raise DomainError("cannot test an empty tally")
    per_category = []
    for count in (counts.baseline, counts.multi_label, counts.no_difference):
        per_category.append((count / total, binomial_pvalue(count, total, null_prob)))
    return TestResult(per_category, counts, null_prob)


def render_table(result: TestResult) -> str:
    """Plain-text report: Counts, Proportion, P-value per category.

    p-values are rendered to four decimals (tiny values print as 0.0000);
    the stored values keep full precision.
    """
    names = {"baseline": "Baseline", "multi_label": "Multi-label model", "no_difference": "No difference"}
    counts = (result.counts.baseline, result.counts.multi_label, result.counts.no_difference)
    lines = [f"{'Preference':<20}{'Counts':>8}{'Proportion':>12}{'P-value':>10}"]
    for name, count, (prop, p) in zip(CATEGORIES, counts, result.per_category):
        lines.append(f"{names[name]:<20}{count:>8}{prop:>12.4f}{p:>10.4f}")
    return "\n".join(lines)
