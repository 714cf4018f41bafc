"""Gaussian-bump synthetic ECG generator with exact ground-truth annotations.

Every beat is the sum of five Gaussian bumps (P, Q, R, S, T) placed relative to
the R time.  Because each bump is known in closed form, the annotation of a wave
follows directly from its bump: the peak is the argmax of the isolated bump and
the interval spans +-3 sigma.  The model is not physiological; it only has to be
plausible enough for the denoising and delineation benchmarks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .annotations import WaveAnnotation, sort_annotations
from .segment import DEFAULT_SAMPLE_RATE, EcgSegment
from .seeding import derive_seed

BUMPS = ("P", "Q", "R", "S", "T")


@dataclass(frozen=True)
class WaveShape:
    amplitude: float  # mV in lead II
    width: float  # Gaussian sigma, seconds
    offset: float  # centre relative to R, seconds


DEFAULT_WAVE_SHAPES: Mapping[str, WaveShape] = {
    "P": WaveShape(0.25, 0.010, -0.090),
    "Q": WaveShape(-0.15, 0.006, -0.020),
    "R": WaveShape(1.60, 0.008, 0.000),
    "S": WaveShape(-0.35, 0.007, 0.020),
    "T": WaveShape(0.35, 0.022, 0.190),
}

# Per-lead gains applied to each bump.  Lead II carries the reference amplitudes
# so the P wave is upright there.
DEFAULT_LEAD_GAINS: Mapping[str, Mapping[str, float]] = {
    "I": {"P": 0.6, "Q": 0.5, "R": 0.45, "S": 0.8, "T": 0.5},
    "II": {"P": 1.0, "Q": 1.0, "R": 1.0, "S": 1.0, "T": 1.0},
}


@dataclass(frozen=True)
class SynthParams:
    heart_rate: float = 100.0
    wave_shapes: Mapping[str, WaveShape] = field(default_factory=lambda: dict(DEFAULT_WAVE_SHAPES))
    rr_jitter: float = 0.0
    seed: int = 0
    lead_gains: Mapping[str, Mapping[str, float]] = field(
        default_factory=lambda: {k: dict(v) for k, v in DEFAULT_LEAD_GAINS.items()}
    )
    # probability that a wave (P, QRS or T) is drawn abnormal, and how
    abnormal_prob: float = 0.0
    abnormal_amplitude_factor: float = 2.5

    def __post_init__(self):
        if not self.heart_rate > 0:
            raise ValueError("heart_rate must be positive")
        if self.rr_jitter < 0:
            raise ValueError("rr_jitter must be >= 0")
        if not 0 <= self.abnormal_prob <= 1:
            raise ValueError("abnormal_prob must lie in [0, 1]")
        missing = set(BUMPS) - set(self.wave_shapes)
        if missing:
            raise ValueError(f"wave_shapes missing {sorted(missing)}")
        for name, shape in self.wave_shapes.items():
            if not shape.width > 0:
                raise ValueError(f"width of {name} must be positive")

    @property
    def period(self) -> float:
        return 60.0 / self.heart_rate

    def beat_extent(self) -> tuple[float, float]:
        """Earliest and latest +-3 sigma edge of any bump, relative to R (seconds)."""
        lo = min(s.offset - 3 * s.width for s in self.wave_shapes.values())
        hi = max(s.offset + 3 * s.width for s in self.wave_shapes.values())
        return lo, hi


def _bump_peak(center: float, lo: int, hi: int) -> int:
    idx = np.arange(lo, hi)
    return int(idx[np.argmax(-np.abs(idx - center))])


def _r_times(params: SynthParams, duration: float, rng: np.random.Generator) -> list[float]:
    lead_in, lead_out = params.beat_extent()
    extent = lead_out - lead_in
    period = params.period
    lo_factor = max(0.5, extent / period)
    t = max(0.5 * period, -lead_in)
    times = []
    while t + lead_out <= duration:
        times.append(t)
        factor = 1.0
        if params.rr_jitter > 0:
            factor = float(np.clip(1.0 + params.rr_jitter * rng.standard_normal(), lo_factor, 1.5))
        t += period * factor
    return times


def synth_clean_ecg(params: SynthParams, duration: float = 10.0,
                    sample_rate: float = DEFAULT_SAMPLE_RATE, segment_id: str = "synth",
                    leads: tuple[str, ...] = ("I", "II")):
    """Generate a clean segment and its ground-truth annotations.

    Only complete beats (all bumps within +-3 sigma inside the segment) are
    placed.  Annotations are derived from lead II geometry and are sorted by
    peak.  Returns ``(EcgSegment, list[WaveAnnotation])``.
    """
    if not duration > 0:
        raise ValueError("duration must be positive")
    lead_in, lead_out = params.beat_extent()
    if lead_out - lead_in > params.period:
        raise ValueError(
            f"beat extent {lead_out - lead_in:.3f} s exceeds beat period {params.period:.3f} s"
        )
    for lead in leads:
        if lead not in params.lead_gains:
            raise ValueError(f"no gains configured for lead {lead!r}")

    rng = np.random.default_rng(params.seed)
    n = int(round(duration * sample_rate))
    fs = sample_rate
    t_idx = np.arange(n, dtype=np.float64)
    data = np.zeros((len(leads), n))
    annotations: list[WaveAnnotation] = []
    shapes = params.wave_shapes

    for r_time in _r_times(params, duration, rng):
        # one abnormal draw per wave: P, QRS (Q, R, S together), T
        draws = rng.random(3)
        scale = {
            "P": params.abnormal_amplitude_factor if draws[0] < params.abnormal_prob else 1.0,
            "QRS": params.abnormal_amplitude_factor if draws[1] < params.abnormal_prob else 1.0,
            "T": params.abnormal_amplitude_factor if draws[2] < params.abnormal_prob else 1.0,
        }
        centers = {}
        for bump in BUMPS:
            shape = shapes[bump]
            wave = "QRS" if bump in ("Q", "R", "S") else bump
            center = (r_time + shape.offset) * fs
            sigma = shape.width * fs
            lo = max(0, int(math.floor(center - 6 * sigma)))
            hi = min(n, int(math.ceil(center + 6 * sigma)) + 1)
            g = np.exp(-0.5 * ((t_idx[lo:hi] - center) / sigma) ** 2)
            for row, lead in enumerate(leads):
                amp = shape.amplitude * params.lead_gains[lead][bump] * scale[wave]
                data[row, lo:hi] += amp * g
            centers[bump] = (center, sigma, lo, hi)

        for wave, first, last, peak_bump in (("P", "P", "P", "P"), ("QRS", "Q", "S", "R"),
                                             ("T", "T", "T", "T")):
            c_first, s_first, _, _ = centers[first]
            c_last, s_last, _, _ = centers[last]
            c_peak, _, lo, hi = centers[peak_bump]
            onset = max(0, int(math.ceil(c_first - 3 * s_first)))
            offset = min(n, int(math.floor(c_last + 3 * s_last)) + 1)
            annotations.append(WaveAnnotation(wave, _bump_peak(c_peak, lo, hi), onset, offset,
                                              normal=scale[wave] == 1.0))

    segment = EcgSegment(tuple(leads), data, sample_rate, segment_id)
    return segment, sort_annotations(annotations)


def jittered_params(base: SynthParams, rng: np.random.Generator,
                    heart_rate_range=(60.0, 140.0), amplitude_jitter=0.2,
                    seed: int | None = None) -> SynthParams:
    """Per-segment variation of ``base``: heart rate and bump amplitudes."""
    shapes = {
        name: replace(s, amplitude=s.amplitude * float(rng.uniform(1 - amplitude_jitter,
                                                                    1 + amplitude_jitter)))
        for name, s in base.wave_shapes.items()
    }
    hr = float(rng.uniform(*heart_rate_range))
    return replace(base, heart_rate=hr, wave_shapes=shapes,
                   seed=base.seed if seed is None else seed)


def synth_corpus(n_segments: int, master_seed: int = 0, duration: float = 10.0,
                 sample_rate: float = DEFAULT_SAMPLE_RATE, base: SynthParams | None = None,
                 heart_rate_range=(60.0, 140.0), amplitude_jitter=0.2, id_prefix="seg"):
    """Generate ``n_segments`` varied clean segments with annotations.

    Each segment draws its parameters from a seed derived from
    ``(master_seed, segment_id)``, so any segment can be regenerated alone.
    """
    base = base or SynthParams()
    width = max(5, len(str(n_segments - 1)))
    out = []
    for i in range(n_segments):
        seg_id = f"{id_prefix}{i:0{width}d}"
        seed = derive_seed(master_seed, "synth", seg_id)
        rng = np.random.default_rng(seed)
        params = jittered_params(base, rng, heart_rate_range, amplitude_jitter, seed=seed)
        out.append(synth_clean_ecg(params, duration, sample_rate, seg_id))
    return out
