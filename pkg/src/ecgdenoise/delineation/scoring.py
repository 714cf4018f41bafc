"""Delineation scoring: wave matching, peak / interval / normality confusion
counts, composite peak-wave counts and a total error count.

Matching is greedy: truth peaks are visited in ascending order and each takes the
closest unused prediction of the same wave type within the matching threshold
(ties go to the earlier prediction).  True negatives are never counted for peaks
or intervals; for normality they are the matched pairs where both are normal.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

from ..annotations import WAVE_TYPES, WaveAnnotation

DEFAULT_MATCHING_THRESHOLD_MS = 150.0
DEFAULT_PRECISION_THRESHOLD_MS = 2.0
DEFAULT_OVERLAP_THRESHOLD = 0.8


def ms_to_samples(ms: float, sample_rate: float) -> int:
    """Milliseconds to samples, rounding half up (2 ms at 500 Hz is 1 sample)."""
    return int(math.floor(ms * sample_rate / 1000.0 + 0.5))


@dataclass
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn,
                               self.tn + other.tn)

    @property
    def errors(self) -> int:
        return self.fp + self.fn

    def to_dict(self) -> dict:
        return asdict(self)


def _per_type() -> dict[str, ConfusionCounts]:
    return {t: ConfusionCounts() for t in WAVE_TYPES}


def total_counts(counts: dict[str, ConfusionCounts]) -> ConfusionCounts:
    out = ConfusionCounts()
    for c in counts.values():
        out = out + c
    return out


@dataclass
class MatchResult:
    pairs: list[tuple[WaveAnnotation, WaveAnnotation, int]] = field(default_factory=list)
    unmatched_truth: list[WaveAnnotation] = field(default_factory=list)
    unmatched_predicted: list[WaveAnnotation] = field(default_factory=list)

    def distances(self) -> list[int]:
        return [d for _, _, d in self.pairs]


def _check_sorted(annotations: Sequence[WaveAnnotation], name: str) -> None:
    peaks = [a.peak for a in annotations]
    if any(b < a for a, b in zip(peaks, peaks[1:])):
        raise ValueError(f"{name} annotations must be sorted by peak")


def match_waves(truth: Sequence[WaveAnnotation], predicted: Sequence[WaveAnnotation],
                matching_threshold: int) -> MatchResult:
    """Greedy nearest-peak matching within each wave type (thresholds in samples)."""
    if matching_threshold < 0:
        raise ValueError("matching_threshold must be >= 0")
    _check_sorted(truth, "truth")
    _check_sorted(predicted, "predicted")
    result = MatchResult()
    used = [False] * len(predicted)
    matched_truth = set()
    for ti, t in enumerate(truth):
        best, best_d = None, None
        for pi, p in enumerate(predicted):
            if used[pi] or p.wave_type != t.wave_type:
                continue
            d = abs(p.peak - t.peak)
            if d <= matching_threshold and (best_d is None or d < best_d):
                best, best_d = pi, d
        if best is not None:
            used[best] = True
            matched_truth.add(ti)
            result.pairs.append((t, predicted[best], best_d))
    result.unmatched_truth = [t for i, t in enumerate(truth) if i not in matched_truth]
    result.unmatched_predicted = [p for i, p in enumerate(predicted) if not used[i]]
    return result


def interval_overlap(predicted: tuple[int, int], truth: tuple[int, int]) -> tuple[float, float]:
    """``(|overlap| / |predicted|, |overlap| / |truth|)`` for half-open intervals."""
    (ps, pe), (ts, te) = predicted, truth
    if pe <= ps or te <= ts:
        raise ValueError("intervals must be non-empty")
    inter = max(0, min(pe, te) - max(ps, ts))
    return inter / (pe - ps), inter / (te - ts)


def peak_outcomes(match: MatchResult, precision_threshold: int) -> list[bool]:
    """Per matched pair: peak within ``precision_threshold`` samples (inclusive)."""
    return [d <= precision_threshold for _, _, d in match.pairs]


def interval_outcomes(match: MatchResult,
                      overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD) -> list[bool]:
    out = []
    for t, p, _ in match.pairs:
        share_pred, share_truth = interval_overlap(p.interval, t.interval)
        out.append(share_pred >= overlap_threshold and share_truth >= overlap_threshold)
    return out


def _counts_from_outcomes(match: MatchResult, ok: Sequence[bool]) -> dict[str, ConfusionCounts]:
    counts = _per_type()
    for (t, _, _), good in zip(match.pairs, ok):
        c = counts[t.wave_type]
        if good:
            c.tp += 1
        else:
            # the prediction is a false positive and its truth goes unmet
            c.fp += 1
            c.fn += 1
    for p in match.unmatched_predicted:
        counts[p.wave_type].fp += 1
    for t in match.unmatched_truth:
        counts[t.wave_type].fn += 1
    return counts


def classify_peaks(match: MatchResult, precision_threshold: int) -> dict[str, ConfusionCounts]:
    return _counts_from_outcomes(match, peak_outcomes(match, precision_threshold))


def classify_intervals(match: MatchResult,
                       overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD
                       ) -> dict[str, ConfusionCounts]:
    return _counts_from_outcomes(match, interval_outcomes(match, overlap_threshold))


def normality_outcomes(match: MatchResult) -> list[bool]:
    return [t.normal == p.normal for t, p, _ in match.pairs]


def classify_normality(match: MatchResult) -> dict[str, ConfusionCounts]:
    """Abnormal is the positive class; only matched pairs are scored."""
    counts = _per_type()
    for t, p, _ in match.pairs:
        c = counts[t.wave_type]
        if not t.normal and not p.normal:
            c.tp += 1
        elif t.normal and p.normal:
            c.tn += 1
        elif t.normal:
            c.fp += 1
        else:
            c.fn += 1
    return counts


def composite_peak_wave(match: MatchResult, peak_ok: Sequence[bool],
                        interval_ok: Sequence[bool], normality_ok: Sequence[bool]):
    """Combine per-pair component results.

    A matched pair is a peak-wave true positive when both its peak and interval
    are; otherwise the prediction counts as a false positive and its truth as a
    false negative.  Unmatched predictions and truths count fp and fn.  Returns
    ``(counts per wave type, complete agreement count)``, where complete
    agreement also requires the normal/abnormal label to agree.
    """
    n = len(match.pairs)
    if not (len(peak_ok) == len(interval_ok) == len(normality_ok) == n):
        raise ValueError("component outcomes must cover the same matched pairs")
    both = [a and b for a, b in zip(peak_ok, interval_ok)]
    counts = _counts_from_outcomes(match, both)
    agreement = sum(1 for b, c in zip(both, normality_ok) if b and c)
    return counts, agreement


@dataclass(frozen=True)
class Thresholds:
    matching_ms: float = DEFAULT_MATCHING_THRESHOLD_MS
    precision_ms: float = DEFAULT_PRECISION_THRESHOLD_MS
    overlap: float = DEFAULT_OVERLAP_THRESHOLD

    def in_samples(self, sample_rate: float) -> tuple[int, int]:
        return (ms_to_samples(self.matching_ms, sample_rate),
                ms_to_samples(self.precision_ms, sample_rate))

    def to_dict(self) -> dict:
        return asdict(self)


def score_delineation(truth, predicted, sample_rate: float = 500.0,
                      thresholds: Thresholds | None = None) -> dict:
    """Full scoring report for one segment (JSON-serializable)."""
    th = thresholds or Thresholds()
    match_thr, prec_thr = th.in_samples(sample_rate)
    if match_thr < prec_thr:
        raise ValueError("matching threshold must be at least the precision threshold")
    match = match_waves(truth, predicted, match_thr)
    p_ok = peak_outcomes(match, prec_thr)
    i_ok = interval_outcomes(match, th.overlap)
    n_ok = normality_outcomes(match)
    peaks = _counts_from_outcomes(match, p_ok)
    intervals = _counts_from_outcomes(match, i_ok)
    normality = classify_normality(match)
    composite, agreement = composite_peak_wave(match, p_ok, i_ok, n_ok)
    errors = sum(peaks[t].errors + intervals[t].errors + normality[t].errors
                 for t in WAVE_TYPES)
    return {
        "n_truth": len(truth),
        "n_predicted": len(predicted),
        "n_matched": len(match.pairs),
        "peak_distances": match.distances(),
        "peaks": {t: c.to_dict() for t, c in peaks.items()},
        "intervals": {t: c.to_dict() for t, c in intervals.items()},
        "normality": {t: c.to_dict() for t, c in normality.items()},
        "peak_wave": {t: c.to_dict() for t, c in composite.items()},
        "complete_agreement": agreement,
        "errors": errors,
    }


def delineation_error_count(truth, predicted, sample_rate: float = 500.0,
                            thresholds: Thresholds | None = None) -> int:
    """Sum over wave types of peak, interval and normality false positives and
    false negatives."""
    return score_delineation(truth, predicted, sample_rate, thresholds)["errors"]
