import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ecgdenoise.synth import (DEFAULT_WAVE_SHAPES, SynthParams, WaveShape, synth_clean_ecg,
                              synth_corpus)


def local_maxima(x, min_height):
    """Plain scan: strict-left / non-strict-right local maxima above a height."""
    out = []
    for i in range(1, len(x) - 1):
        if x[i] > x[i - 1] and x[i] >= x[i + 1] and x[i] >= min_height:
            out.append(i)
    return out


def test_sixty_bpm_gives_ten_r_peaks_500_apart():
    seg, ann = synth_clean_ecg(SynthParams(heart_rate=60), 10.0, 500.0)
    peaks = local_maxima(seg.lead("II"), 1.0)
    assert len(peaks) == 10
    assert np.all(np.diff(peaks) == 500)
    qrs = [a.peak for a in ann if a.wave_type == "QRS"]
    assert qrs == peaks


def test_zero_amplitudes_flat_but_annotated():
    shapes = {k: replace(v, amplitude=0.0) for k, v in DEFAULT_WAVE_SHAPES.items()}
    seg, ann = synth_clean_ecg(SynthParams(heart_rate=60, wave_shapes=shapes))
    assert np.all(seg.data == 0)
    assert len(ann) == 30


def test_deterministic():
    p = SynthParams(heart_rate=90, rr_jitter=0.05, seed=7)
    s1, a1 = synth_clean_ecg(p)
    s2, a2 = synth_clean_ecg(p)
    assert s1.data.tobytes() == s2.data.tobytes()
    assert a1 == a2


def test_wave_wider_than_period_rejected():
    shapes = dict(DEFAULT_WAVE_SHAPES)
    shapes["T"] = WaveShape(0.3, 0.2, 0.19)
    with pytest.raises(ValueError):
        synth_clean_ecg(SynthParams(heart_rate=100, wave_shapes=shapes))


def test_param_invariants():
    with pytest.raises(ValueError):
        SynthParams(heart_rate=0)
    with pytest.raises(ValueError):
        SynthParams(rr_jitter=-0.1)
    with pytest.raises(ValueError):
        synth_clean_ecg(SynthParams(), duration=0)


def test_peak_is_argmax_of_isolated_bump():
    # at 333 Hz the bump centres fall between samples
    fs, hr = 333.0, 75.0
    p = SynthParams(heart_rate=hr)
    seg, ann = synth_clean_ecg(p, 4.0, fs)
    t = np.arange(seg.n_samples)
    r_times = [0.4 + 0.8 * k for k in range(5)]  # first R at half a period, no jitter
    by_type = {w: [a for a in ann if a.wave_type == w] for w in ("P", "QRS", "T")}
    assert len(by_type["QRS"]) == 5  # last beat ends at 3.6 + 0.256 s
    for wave, bump in (("P", "P"), ("QRS", "R"), ("T", "T")):
        shape = p.wave_shapes[bump]
        for r, a in zip(r_times, by_type[wave]):
            centre = (r + shape.offset) * fs
            isolated = shape.amplitude * np.exp(-0.5 * ((t - centre) / (shape.width * fs)) ** 2)
            assert a.peak == int(np.argmax(isolated))


@settings(max_examples=25, deadline=None)
@given(hr=st.floats(45, 160), jitter=st.floats(0, 0.1), seed=st.integers(0, 10_000))
def test_ordering_and_p_before_qrs(hr, jitter, seed):
    p = SynthParams(heart_rate=hr, rr_jitter=jitter, seed=seed)
    seg, ann = synth_clean_ecg(p, 10.0)
    peaks = [a.peak for a in ann]
    assert peaks == sorted(peaks)
    types = [a.wave_type for a in ann]
    assert types == ["P", "QRS", "T"] * (len(ann) // 3)
    period = 60.0 / hr * 500.0 * 1.5
    for i in range(0, len(ann), 3):
        pw, qrs, tw = ann[i:i + 3]
        assert pw.peak < qrs.peak < tw.peak
        assert qrs.peak - pw.peak <= period
        for a in (pw, qrs, tw):
            assert 0 <= a.onset <= a.peak < a.offset <= seg.n_samples
            assert a.normal


def test_lead_ii_p_upright_and_lead_gains():
    seg, ann = synth_clean_ecg(SynthParams(heart_rate=80))
    for a in (a for a in ann if a.wave_type == "P"):
        assert seg.lead("II")[a.peak] > 0
    assert np.max(seg.lead("I")) < np.max(seg.lead("II"))


def test_abnormal_draws_flag_waves():
    seg, ann = synth_clean_ecg(SynthParams(heart_rate=70, abnormal_prob=1.0,
                                           abnormal_amplitude_factor=2.0))
    assert ann and not any(a.normal for a in ann)


def test_corpus_ids_and_regeneration():
    c1 = synth_corpus(4, master_seed=3)
    c2 = synth_corpus(4, master_seed=3)
    assert [s.segment_id for s, _ in c1] == ["seg00000", "seg00001", "seg00002", "seg00003"]
    for (a, _), (b, _) in zip(c1, c2):
        assert a.equals(b)
    assert not c1[0][0].equals(synth_corpus(1, master_seed=4)[0][0])


def test_annotation_interval_is_three_sigma():
    fs = 500.0
    p = SynthParams(heart_rate=60)
    seg, ann = synth_clean_ecg(p, 3.0, fs)
    r_shape, q_shape, s_shape = (p.wave_shapes[k] for k in ("R", "Q", "S"))
    for a in (a for a in ann if a.wave_type == "QRS"):
        r_center = a.peak  # R centre falls on an integer sample at 60 bpm
        on = math.ceil(r_center + (q_shape.offset - 3 * q_shape.width) * fs)
        off = math.floor(r_center + (s_shape.offset + 3 * s_shape.width) * fs) + 1
        assert (a.onset, a.offset) == (on, off)
