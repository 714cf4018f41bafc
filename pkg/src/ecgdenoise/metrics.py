"""Waveform similarity metrics and the seven-number statistical summary.

Signal power is a plain sum of squares (not a mean), and the SNR compares the
power of the reference ``X`` with the power of the noisy signal ``X + xi``
itself, not with the power of ``xi``.  Both follow the definitions used for the
benchmark tables, so values are not comparable with mean-power SNR figures.
"""
from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields

import numpy as np


def _vec(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64).ravel()


def _pair(x, y):
    x, y = _vec(x), _vec(y)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    return x, y


def signal_power(x) -> float:
    x = _vec(x)
    if x.size == 0:
        raise ValueError("signal must be non-empty")
    return float(np.dot(x, x))


def signal_power_log(x) -> float:
    p = signal_power(x)
    if p == 0:
        raise ValueError("log signal power undefined for an all-zero signal")
    return 10.0 * math.log10(p)


def snr(x, y) -> float:
    """SNR in dB of reference ``x`` to noisy ``y = x + xi``."""
    x, y = _pair(x, y)
    return signal_power_log(x) - signal_power_log(y)


def ssd(x, y) -> float:
    x, y = _pair(x, y)
    d = x - y
    return float(np.dot(d, d))


def mad(x, y) -> float:
    """Maximum absolute difference."""
    x, y = _pair(x, y)
    if x.size == 0:
        raise ValueError("signals must be non-empty")
    return float(np.max(np.abs(x - y)))


def cosine_similarity(x, y) -> float:
    x, y = _pair(x, y)
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        raise ValueError("cosine similarity undefined for a zero vector")
    return float(np.clip(np.dot(x, y) / (nx * ny), -1.0, 1.0))


def cosine_distance(x, y) -> float:
    return 1.0 - cosine_similarity(x, y)


def noise_removed_fraction(metric_added: float, metric_cleaned: float) -> float:
    """``(added - cleaned) / added``: 1 is perfect removal, negative means the
    denoiser made the signal worse than the noisy input."""
    if not metric_added > 0:
        raise ValueError("metric_added must be positive")
    return (metric_added - metric_cleaned) / metric_added


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    std_dev: float
    min: float
    q25: float
    q50: float
    q75: float
    max: float

    def as_tuple(self) -> tuple[float, ...]:
        return astuple(self)

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


def summarize_stats(values) -> MetricSummary:
    """Mean, sample standard deviation (n-1; 0 for a single value), extremes and
    linearly interpolated quartiles."""
    v = _vec(values)
    if v.size == 0:
        raise ValueError("cannot summarize an empty collection")
    std = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
    q25, q50, q75 = np.percentile(v, [25, 50, 75], method="linear")
    return MetricSummary(float(np.mean(v)), std, float(v.min()), float(q25), float(q50),
                         float(q75), float(v.max()))
