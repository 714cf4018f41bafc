"""Rule-based reference delineator working on lead II.

QRS complexes are found by thresholding the smoothed squared first difference
(a derivative-energy detector) with a refractory period.  The R peak is the
largest sample of the complex.  P and T are the largest deviations from a local
baseline in windows before and after each R.  Wave edges are where the
deviation from a per-beat baseline (median of the beat's flattest samples) falls
below a fraction of the wave's height, with a small absolute floor; the default
fraction ``exp(-4.5)`` puts the edges of a Gaussian wave near +-3 sigma.  A wave
is normal when its height and width fall inside configured bands.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from ..annotations import WaveAnnotation, sort_annotations
from ..segment import EcgSegment


@dataclass(frozen=True)
class NormalBand:
    amplitude: tuple[float, float]  # |height above baseline|, mV
    width: tuple[float, float]  # seconds

    def contains(self, height: float, width_s: float) -> bool:
        return (self.amplitude[0] <= abs(height) <= self.amplitude[1]
                and self.width[0] <= width_s <= self.width[1])


def _default_bands():
    return {
        "P": NormalBand((0.10, 0.45), (0.03, 0.09)),
        "QRS": NormalBand((0.60, 2.80), (0.04, 0.12)),
        "T": NormalBand((0.12, 0.60), (0.08, 0.20)),
    }


@dataclass(frozen=True)
class DelineatorConfig:
    lead: str = "II"
    energy_window: float = 0.04  # s, smoothing of the squared difference
    qrs_rel_threshold: float = 0.25  # fraction of the maximum energy
    qrs_abs_threshold: float = 1e-4  # (mV / sample)^2, floor for flat signals
    refractory: float = 0.2  # s
    r_search: float = 0.03  # s around an energy region
    q_search: float = 0.035  # s before / after R for Q and S
    qs_min_fraction: float = 0.02  # Q/S must reach this fraction of the R height
    p_window: tuple[float, float] = (0.16, 0.045)  # s before R: (far, near)
    t_window: tuple[float, float] = (0.08, 0.32)  # s after R: (near, far)
    min_wave_amplitude: float = 0.03  # mV, weaker P/T are not reported
    edge_fraction: float = math.exp(-4.5)
    edge_floor: float = 0.005  # mV, lowest deviation treated as part of a wave
    baseline_quantile: float = 0.3  # flattest fraction of a beat used for the baseline
    max_half_width: dict = field(default_factory=lambda: {"P": 0.06, "QRS": 0.08, "T": 0.12})
    bands: dict = field(default_factory=_default_bands)

    @property
    def min_length(self) -> float:
        """Shortest segment (s) the detector accepts."""
        return self.refractory

    def to_dict(self) -> dict:
        return asdict(self)


def _moving_average(x: np.ndarray, width: int) -> np.ndarray:
    width = max(1, width)
    return np.convolve(x, np.ones(width) / width, mode="same")


def _regions(mask: np.ndarray) -> list[tuple[int, int]]:
    padded = np.concatenate(([False], mask, [False])).astype(np.int8)
    edges = np.flatnonzero(np.diff(padded))
    return list(zip(edges[::2].tolist(), edges[1::2].tolist()))


def detect_r_peaks(x: np.ndarray, fs: float, cfg: DelineatorConfig) -> list[int]:
    d = np.diff(x, prepend=x[0])
    energy = _moving_average(d * d, int(round(cfg.energy_window * fs)))
    peak_energy = float(energy.max())
    threshold = max(cfg.qrs_rel_threshold * peak_energy, cfg.qrs_abs_threshold)
    if peak_energy < threshold:
        return []
    search = int(round(cfg.r_search * fs))
    refractory = int(round(cfg.refractory * fs))
    candidates = []
    for lo, hi in _regions(energy >= threshold):
        a, b = max(0, lo - search), min(len(x), hi + search)
        candidates.append(a + int(np.argmax(x[a:b])))
    peaks: list[int] = []
    for r in candidates:
        if peaks and r - peaks[-1] < refractory:
            if x[r] > x[peaks[-1]]:
                peaks[-1] = r
            continue
        if not peaks or r != peaks[-1]:
            peaks.append(r)
    return peaks


def _edge(x: np.ndarray, start: int, step: int, level: float, limit: int, base: float) -> int:
    """Walk from ``start`` in direction ``step`` while ``|x - base| >= level``;
    return the last index inside the wave."""
    i = start
    n = len(x)
    for _ in range(limit):
        j = i + step
        if j < 0 or j >= n or abs(x[j] - base) < level:
            break
        i = j
    return i


def _level(height: float, cfg: DelineatorConfig) -> float:
    return max(cfg.edge_fraction * abs(height), cfg.edge_floor)


def _baseline(x: np.ndarray, lo: int, hi: int, cfg: DelineatorConfig) -> float:
    """Median of the flattest samples (smallest |first difference|) of a beat."""
    seg = x[lo:hi]
    if len(seg) < 3:
        return float(np.median(seg))
    slope = np.abs(np.gradient(seg))
    k = max(1, int(cfg.baseline_quantile * len(seg)))
    flat = np.argsort(slope, kind="stable")[:k]
    return float(np.median(seg[flat]))


def _wave(x, peak, base, height, fs, cfg, wave_type):
    limit = int(round(cfg.max_half_width[wave_type] * fs))
    level = _level(height, cfg)
    on = _edge(x, peak, -1, level, limit, base)
    off = _edge(x, peak, +1, level, limit, base) + 1
    normal = cfg.bands[wave_type].contains(height, (off - on) / fs)
    return WaveAnnotation(wave_type, peak, on, off, normal)


def _qrs(x, r, base, fs, cfg):
    h_r = x[r] - base
    search = int(round(cfg.q_search * fs))
    limit = int(round(cfg.max_half_width["QRS"] * fs))
    n = len(x)

    a = max(0, r - search)
    q = a + int(np.argmin(x[a:r + 1]))
    if base - x[q] >= cfg.qs_min_fraction * h_r and q < r:
        on = _edge(x, q, -1, _level(base - x[q], cfg), limit, base)
    else:
        on = _edge(x, r, -1, _level(h_r, cfg), limit, base)

    b = min(n, r + search + 1)
    s = r + int(np.argmin(x[r:b]))
    if base - x[s] >= cfg.qs_min_fraction * h_r and s > r:
        off = _edge(x, s, +1, _level(base - x[s], cfg), limit, base) + 1
    else:
        off = _edge(x, r, +1, _level(h_r, cfg), limit, base) + 1
    normal = cfg.bands["QRS"].contains(h_r, (off - on) / fs)
    return WaveAnnotation("QRS", r, on, off, normal)


def reference_delineate(segment: EcgSegment, config: DelineatorConfig | None = None
                        ) -> list[WaveAnnotation]:
    """Delineate ``segment`` (lead ``config.lead``); annotations sorted by peak."""
    cfg = config or DelineatorConfig()
    x = np.asarray(segment.lead(cfg.lead), dtype=np.float64)
    fs = segment.sample_rate
    n = len(x)
    if n < cfg.min_length * fs:
        raise ValueError(
            f"segment of {n} samples is shorter than the detector window "
            f"({cfg.min_length * fs:.0f} samples)")
    r_peaks = detect_r_peaks(x, fs, cfg)
    out = []
    for i, r in enumerate(r_peaks):
        rr_prev = r - r_peaks[i - 1] if i > 0 else None
        rr_next = r_peaks[i + 1] - r if i + 1 < len(r_peaks) else None
        rr = rr_prev or rr_next or int(fs)
        beat_lo = max(0, r - (rr_prev or rr) // 2)
        beat_hi = min(n, r + (rr_next or rr) // 2 + 1)
        base = _baseline(x, beat_lo, beat_hi, cfg)
        out.append(_qrs(x, r, base, fs, cfg))

        p_lo = max(0, r - int(round(min(cfg.p_window[0], 0.45 * (rr_prev or rr) / fs) * fs)))
        p_hi = max(0, r - int(round(cfg.p_window[1] * fs)))
        if p_hi - p_lo >= 3:
            dev = x[p_lo:p_hi] - base
            p = p_lo + int(np.argmax(np.abs(dev)))
            if abs(x[p] - base) >= cfg.min_wave_amplitude:
                out.append(_wave(x, p, base, x[p] - base, fs, cfg, "P"))

        t_lo = min(n, r + int(round(cfg.t_window[0] * fs)))
        far = min(cfg.t_window[1], (rr_next or rr) / fs - cfg.p_window[0])
        t_hi = min(n, r + int(round(far * fs)))
        if t_hi - t_lo >= 3:
            dev = x[t_lo:t_hi] - base
            t = t_lo + int(np.argmax(np.abs(dev)))
            if abs(x[t] - base) >= cfg.min_wave_amplitude:
                out.append(_wave(x, t, base, x[t] - base, fs, cfg, "T"))
    return sort_annotations(out)
