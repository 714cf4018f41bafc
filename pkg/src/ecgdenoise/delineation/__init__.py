"""Reference delineator and delineation scoring."""
from ..annotations import WAVE_TYPES, WaveAnnotation
from .delineator import DelineatorConfig, NormalBand, detect_r_peaks, reference_delineate
from .scoring import (ConfusionCounts, MatchResult, Thresholds, classify_intervals,
                      classify_normality, classify_peaks, composite_peak_wave,
                      delineation_error_count, interval_outcomes, interval_overlap,
                      match_waves, ms_to_samples, normality_outcomes, peak_outcomes,
                      score_delineation, total_counts)

__all__ = [
    "WAVE_TYPES", "WaveAnnotation", "DelineatorConfig", "NormalBand", "detect_r_peaks",
    "reference_delineate", "ConfusionCounts", "MatchResult", "Thresholds",
    "classify_intervals", "classify_normality", "classify_peaks", "composite_peak_wave",
    "delineation_error_count", "interval_outcomes", "interval_overlap", "match_waves",
    "ms_to_samples", "normality_outcomes", "peak_outcomes", "score_delineation",
    "total_counts",
]
