"""Quality measures for set-valued predictions and their underlying scores.

Validity is the fraction of regions that contain the true label, so a
two-label region always counts as covered and an empty region never does.
Efficiency is the fraction of single-label regions, the predictions that are
actually informative.  The two deliberately pull apart: predicting both
labels everywhere is 100% valid and 0% efficient.  The region distribution
and the two scored-accuracy conventions make that tension explicit, and the
singleton-conditional block reports how good the informative subset really is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Dataset, Label, PredictionRegion, ScorePair, region_contains

SCORED_ACCURACY_MODES = ("both_correct", "both_wrong")


def _check_paired(name_a: str, a: Sequence, name_b: str, b: Sequence) -> None:
    if len(a) == 0:
        raise ValueError(f"{name_a} must not be empty")
    if len(a) != len(b):
        raise ValueError(
            f"{name_a} and {name_b} must have equal length, got {len(a)} and {len(b)}"
        )


def validity(
    regions: Sequence[PredictionRegion], truths: Sequence[Label]
) -> float:
    """Fraction of regions containing the true label."""
    _check_paired("regions", regions, "truths", truths)
    hits = sum(1 for r, t in zip(regions, truths) if region_contains(r, t))
    return hits / len(regions)


def efficiency(regions: Sequence[PredictionRegion]) -> float:
    """Fraction of single-label regions."""
    if len(regions) == 0:
        raise ValueError("regions must not be empty")
    return sum(1 for r in regions if r.is_singleton) / len(regions)


@dataclass(frozen=True)
class RegionDistribution:
    """How the four region kinds divide the test set.

    frac_correct_single + frac_both is the validity; frac_correct_single +
    frac_false_single is the efficiency.
    """

    frac_correct_single: float
    frac_false_single: float
    frac_both: float
    frac_empty: float

    def __post_init__(self) -> None:
        total = 0.0
        for name in (
            "frac_correct_single",
            "frac_false_single",
            "frac_both",
            "frac_empty",
        ):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {value}")
            total += value
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"fractions must sum to 1, got {total}")

    @property
    def validity(self) -> float:
        return self.frac_both + self.frac_correct_single

    @property
    def efficiency(self) -> float:
        return self.frac_correct_single + self.frac_false_single


def region_distribution(
    regions: Sequence[PredictionRegion], truths: Sequence[Label]
) -> RegionDistribution:
    """Split the predictions into correct singles, wrong singles, both, empty."""
    _check_paired("regions", regions, "truths", truths)
    n = len(regions)
    n_both = sum(1 for r in regions if r is PredictionRegion.BOTH)
    n_empty = sum(1 for r in regions if r is PredictionRegion.EMPTY)
    n_correct = sum(
        1
        for r, t in zip(regions, truths)
        if r.is_singleton and region_contains(r, t)
    )
    n_false = n - n_both - n_empty - n_correct
    return RegionDistribution(n_correct / n, n_false / n, n_both / n, n_empty / n)


def scored_accuracy(
    mode: str, regions: Sequence[PredictionRegion], truths: Sequence[Label]
) -> float:
    """Single-number accuracy under an explicit convention for two-label regions.

    "both_correct" credits a two-label region as a hit (it does contain the
    truth), "both_wrong" counts only correct singletons.  Empty regions are
    wrong either way.  The gap between the two conventions is exactly the
    fraction of two-label regions, which is why reporting one number without
    naming the convention is misleading.
    """
    if mode not in SCORED_ACCURACY_MODES:
        raise ValueError(
            f"mode must be one of {SCORED_ACCURACY_MODES}, got {mode!r}"
        )
    _check_paired("regions", regions, "truths", truths)
    n = len(regions)
    n_correct_single = sum(
        1
        for r, t in zip(regions, truths)
        if r.is_singleton and region_contains(r, t)
    )
    if mode == "both_wrong":
        return n_correct_single / n
    n_both = sum(1 for r in regions if r is PredictionRegion.BOTH)
    return (n_correct_single + n_both) / n


@dataclass(frozen=True)
class BinaryMetrics:
    """Plain thresholded rates; sensitivity/specificity are None when undefined."""

    accuracy: float
    sensitivity: float | None
    specificity: float | None


def binary_metrics(
    scores: Sequence[ScorePair],
    truths: Sequence[Label],
    threshold: float = 0.5,
) -> BinaryMetrics:
    """Threshold probability scores into forced-choice predictions and score them.

    A sample is called positive when s_pos >= threshold (ties go positive).
    Sensitivity is TP / (TP + FN), specificity TN / (TN + FP); a missing
    class leaves the corresponding rate undefined.
    """
    _check_paired("scores", scores, "truths", truths)
    if not all(s.probability for s in scores):
        raise ValueError("binary metrics need probability-type scores")
    if not (math.isfinite(threshold) and 0.0 <= threshold <= 1.0):
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    tp = fp = tn = fn = 0
    for pair, truth in zip(scores, truths):
        called_positive = pair.s_pos >= threshold
        if truth is Label.POSITIVE:
            tp += called_positive
            fn += not called_positive
        else:
            fp += called_positive
            tn += not called_positive
    accuracy = (tp + tn) / len(scores)
    sensitivity = tp / (tp + fn) if (tp + fn) else None
    specificity = tn / (tn + fp) if (tn + fp) else None
    return BinaryMetrics(accuracy, sensitivity, specificity)


def auroc(scores: Sequence[ScorePair], truths: Sequence[Label]) -> float:
    """Rank-based area under the ROC curve on s_pos.

    Equals the win fraction over all positive/negative pairs with ties worth
    half, so all-tied scores give exactly 0.5 and no curve interpolation is
    involved.
    """
    _check_paired("scores", scores, "truths", truths)
    pos = np.sort(
        np.array(
            [s.s_pos for s, t in zip(scores, truths) if t is Label.POSITIVE],
            dtype=float,
        )
    )
    neg = np.sort(
        np.array(
            [s.s_pos for s, t in zip(scores, truths) if t is Label.NEGATIVE],
            dtype=float,
        )
    )
    if pos.size == 0 or neg.size == 0:
        raise ValueError("AUROC needs at least one sample of each class")
    below = np.searchsorted(neg, pos, side="left")
    at_most = np.searchsorted(neg, pos, side="right")
    wins = int(below.sum())
    ties = int((at_most - below).sum())
    return (wins + 0.5 * ties) / (pos.size * neg.size)


@dataclass(frozen=True)
class CalibrationReport:
    """Scoring-quality summary of a calibration set: AUROC, accuracy, size."""

    auroc: float
    accuracy: float
    n: int


def calibration_report(calibration: Dataset, threshold: float = 0.5) -> CalibrationReport:
    """Report how well the ingested probabilities separate the calibration classes.

    This is the health check that tells a reader whether downstream regions
    are built on an informative score or on noise.
    """
    missing = [s.id for s in calibration if s.scores is None or s.true_label is None]
    if missing:
        raise ValueError(
            f"calibration samples need scores and labels, missing for {missing[:5]}"
        )
    if len(calibration) == 0:
        raise ValueError("calibration set must not be empty")
    scores = [s.scores for s in calibration]
    truths = [s.true_label for s in calibration]
    rates = binary_metrics(scores, truths, threshold)
    return CalibrationReport(auroc(scores, truths), rates.accuracy, len(calibration))


@dataclass(frozen=True)
class ConditionalSingletonMetrics:
    """Forced-choice quality restricted to the single-label predictions.

    Rates are None whenever their denominator is empty on the restricted set;
    the counts are always present.
    """

    accuracy: float | None
    sensitivity: float | None
    specificity: float | None
    auroc: float | None
    n_singleton: int
    false_positives_in_singletons: int


def conditional_singleton_metrics(
    regions: Sequence[PredictionRegion],
    scores: Sequence[ScorePair],
    truths: Sequence[Label],
) -> ConditionalSingletonMetrics:
    """Evaluate only the samples that received a single-label region.

    The singleton itself is the forced-choice prediction, so this answers
    "when the predictor commits, how often is it right", which is the
    fair companion number to overall validity.
    """
    _check_paired("regions", regions, "truths", truths)
    _check_paired("regions", regions, "scores", scores)
    picked = [
        (r, s, t)
        for r, s, t in zip(regions, scores, truths)
        if r.is_singleton
    ]
    false_pos = sum(
        1
        for r, _, t in picked
        if r is PredictionRegion.SINGLE_POSITIVE and t is Label.NEGATIVE
    )
    if not picked:
        return ConditionalSingletonMetrics(None, None, None, None, 0, 0)

    predicted = [
        Label.POSITIVE if r is PredictionRegion.SINGLE_POSITIVE else Label.NEGATIVE
        for r, _, _ in picked
    ]
    truth_sub = [t for _, _, t in picked]
    score_sub = [s for _, s, _ in picked]
    hits = sum(1 for p, t in zip(predicted, truth_sub) if p is t)
    accuracy = hits / len(picked)

    tp = sum(
        1 for p, t in zip(predicted, truth_sub)
        if p is Label.POSITIVE and t is Label.POSITIVE
    )
    fn = sum(
        1 for p, t in zip(predicted, truth_sub)
        if p is Label.NEGATIVE and t is Label.POSITIVE
    )
    tn = sum(
        1 for p, t in zip(predicted, truth_sub)
        if p is Label.NEGATIVE and t is Label.NEGATIVE
    )
    fp = len(picked) - tp - fn - tn
    sensitivity = tp / (tp + fn) if (tp + fn) else None
    specificity = tn / (tn + fp) if (tn + fp) else None

    has_both = any(t is Label.POSITIVE for t in truth_sub) and any(
        t is Label.NEGATIVE for t in truth_sub
    )
    restricted_auroc = auroc(score_sub, truth_sub) if has_both else None
    return ConditionalSingletonMetrics(
        accuracy,
        sensitivity,
        specificity,
        restricted_auroc,
        len(picked),
        false_pos,
    )


@dataclass(frozen=True)
class MetricPanel:
    """Forced-choice block of a report; entries are None when not computable."""

    accuracy: float | None
    sensitivity: float | None
    specificity: float | None
    auroc: float | None


def _metric_panel(
    scores: Sequence[ScorePair], truths: Sequence[Label], threshold: float
) -> MetricPanel:
    has_both = any(t is Label.POSITIVE for t in truths) and any(
        t is Label.NEGATIVE for t in truths
    )
    area = auroc(scores, truths) if has_both else None
    if all(s.probability for s in scores):
        rates = binary_metrics(scores, truths, threshold)
        return MetricPanel(rates.accuracy, rates.sensitivity, rates.specificity, area)
    return MetricPanel(None, None, None, area)


@dataclass(frozen=True)
class EvaluationReport:
    """All test-set metrics for one significance level."""

    epsilon: float
    n: int
    validity: float
    efficiency: float
    distribution: RegionDistribution
    scored_accuracy_both_correct: float
    scored_accuracy_both_wrong: float
    binary: MetricPanel
    singleton_conditional: ConditionalSingletonMetrics


def evaluate_predictions(
    regions: Sequence[PredictionRegion],
    scores: Sequence[ScorePair],
    truths: Sequence[Label],
    threshold: float = 0.5,
    epsilon: float = 0.0,
) -> EvaluationReport:
    """Bundle every metric this module defines into one report row."""
    _check_paired("regions", regions, "truths", truths)
    _check_paired("regions", regions, "scores", scores)
    dist = region_distribution(regions, truths)
    return EvaluationReport(
        epsilon=epsilon,
        n=len(regions),
        validity=validity(regions, truths),
        efficiency=efficiency(regions),
        distribution=dist,
        scored_accuracy_both_correct=scored_accuracy("both_correct", regions, truths),
        scored_accuracy_both_wrong=scored_accuracy("both_wrong", regions, truths),
        binary=_metric_panel(scores, truths, threshold),
        singleton_conditional=conditional_singleton_metrics(regions, scores, truths),
    )
