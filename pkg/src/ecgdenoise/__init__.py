"""Synthetic canine ECG denoising benchmark.

Modules: :mod:`segment` (signal container and I/O), :mod:`synth` (clean ECG
generator), :mod:`noise` (noise transforms and datasets), :mod:`filters`
(classical baselines), :mod:`metrics` (similarity metrics),
:mod:`autoencoder` (the learned denoiser), :mod:`delineation` (reference
delineator and scoring), :mod:`report` and :mod:`cli`.
"""
from .annotations import WaveAnnotation
from .segment import EcgSegment, derive_leads, load_segment, save_segment

__version__ = "0.1.0"

__all__ = ["EcgSegment", "WaveAnnotation", "derive_leads", "load_segment", "save_segment"]
