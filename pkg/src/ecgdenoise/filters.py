"""Butterworth designs, zero-phase application and named baseline presets.

Designs are realized as cascaded second-order sections.  Presets are ordered
stage lists read from ``presets.json``; they approximate the cleaning methods of
the same names from their published cutoffs and are not bit-compatible with any
third-party implementation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import signal as sps

from .segment import EcgSegment

FILTER_KINDS = ("lowpass", "highpass", "bandpass", "bandstop")


class FilterError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FilterDesign:
    kind: str
    order: int
    cutoffs: tuple[float, ...]
    sample_rate: float
    sos: np.ndarray = field(repr=False)

    @classmethod
    def identity(cls, sample_rate: float = 500.0) -> "FilterDesign":
        """Pass-through design (unit numerator and denominator)."""
        return cls("identity", 1, (), sample_rate, np.array([[1.0, 0, 0, 1.0, 0, 0]]))

    def response(self, freqs) -> np.ndarray:
        _, h = sps.sosfreqz(self.sos, worN=np.atleast_1d(freqs), fs=self.sample_rate)
        return h

    def to_dict(self) -> dict:
        return {"kind": self.kind, "order": self.order, "cutoffs": list(self.cutoffs)}


def design_butterworth(kind: str, order: int, cutoffs, sample_rate: float) -> FilterDesign:
    """Butterworth design as second-order sections.

    ``cutoffs`` are -3 dB frequencies in Hz: one value for low/highpass, a
    ``(low, high)`` pair for bandpass/bandstop.
    """
    if kind not in FILTER_KINDS:
        raise FilterError(f"kind must be one of {FILTER_KINDS}, got {kind!r}")
    if int(order) != order or order < 1:
        raise FilterError(f"order must be a positive integer, got {order!r}")
    cutoffs = tuple(float(c) for c in np.atleast_1d(cutoffs))
    expected = 2 if kind in ("bandpass", "bandstop") else 1
    if len(cutoffs) != expected:
        raise FilterError(f"{kind} needs {expected} cutoff(s), got {len(cutoffs)}")
    nyquist = sample_rate / 2.0
    for c in cutoffs:
        if not 0 < c < nyquist:
            raise FilterError(f"cutoff {c} Hz must lie strictly inside (0, {nyquist})")
    if expected == 2 and not cutoffs[0] < cutoffs[1]:
        raise FilterError("band edges must satisfy low < high")
    wn = cutoffs[0] if expected == 1 else list(cutoffs)
    sos = sps.butter(int(order), wn, btype=kind, fs=sample_rate, output="sos")
    return FilterDesign(kind, int(order), cutoffs, float(sample_rate), sos)


@dataclass(frozen=True)
class FilterPreset:
    name: str
    stages: tuple[dict, ...]

    def designs(self, sample_rate: float) -> list[FilterDesign]:
        return [design_butterworth(s["kind"], s["order"], s["cutoffs"], sample_rate)
                for s in self.stages]


def _as_designs(filt, sample_rate) -> list[FilterDesign]:
    if isinstance(filt, FilterDesign):
        if filt.sample_rate != sample_rate:
            raise FilterError(
                f"design is for {filt.sample_rate} Hz, segment is {sample_rate} Hz")
        return [filt]
    if isinstance(filt, FilterPreset):
        return filt.designs(sample_rate)
    return [d for f in filt for d in _as_designs(f, sample_rate)]


def pad_length(designs: Sequence[FilterDesign]) -> int:
    return 3 * max(d.order for d in designs)


def _filtfilt(designs, x):
    padlen = pad_length(designs)
    if x.shape[-1] <= padlen:
        raise FilterError(
            f"segment of {x.shape[-1]} samples is too short for pad length {padlen}")
    for d in designs:
        x = sps.sosfiltfilt(d.sos, x, axis=-1, padtype="odd", padlen=padlen)
    return x


def zero_phase_filter(filt, x: np.ndarray, sample_rate: float) -> np.ndarray:
    """Forward-backward filtering of an array along its last axis."""
    return _filtfilt(_as_designs(filt, sample_rate), np.asarray(x, dtype=np.float64))


def apply_zero_phase(filt, segment: EcgSegment) -> EcgSegment:
    """Zero-phase filter every lead with a design, a preset or a list of them.

    Each stage runs forward then backward with odd reflection padding of
    ``3 * max stage order`` samples; output length equals input length.
    """
    return segment.with_data(zero_phase_filter(filt, segment.data, segment.sample_rate))


def apply_causal(filt, segment: EcgSegment) -> EcgSegment:
    """Single forward pass, kept for comparison with :func:`apply_zero_phase`."""
    x = segment.data
    for d in _as_designs(filt, segment.sample_rate):
        x = sps.sosfilt(d.sos, x, axis=-1)
    return segment.with_data(x)


def load_presets(path=None) -> dict[str, FilterPreset]:
    """Preset registry from a JSON file ``{name: [{kind, order, cutoffs}]}``.

    Without ``path`` the shipped defaults are used.
    """
    if path is None:
        text = resources.files("ecgdenoise").joinpath("presets.json").read_text()
    else:
        text = Path(path).read_text()
    raw = json.loads(text)
    registry = {}
    for name, stages in raw.items():
        if not stages:
            raise FilterError(f"preset {name!r} has no stages")
        for s in stages:
            design_butterworth(s["kind"], s["order"], s["cutoffs"], 500.0)
        registry[name] = FilterPreset(name, tuple(dict(s) for s in stages))
    return registry


PRESET_NAMES = ("butterworth", "multi-frequency-butterworth", "biosppy", "elgendi2010",
                "engzeemod2012", "hamilton2002", "neurokit", "pantompkins1985", "vg")

# Row labels used in reports, matching the naming of the published tables.
PRESET_LABELS = {
    "butterworth": "Butterworth Filter",
    "multi-frequency-butterworth": "Multi-Frequency Butterworth",
}


def get_preset(name: str, registry=None) -> FilterPreset:
    registry = load_presets() if registry is None else registry
    try:
        return registry[name]
    except KeyError:
        raise FilterError(
            f"unknown preset {name!r}; registered: {', '.join(sorted(registry))}") from None


def denoise_with_preset(name: str, segment: EcgSegment, registry=None) -> EcgSegment:
    return apply_zero_phase(get_preset(name, registry), segment)
