"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test prints one ``AC<n>: PASS|FAIL`` line before asserting.
"""
import json
import math
import time

import numpy as np
import pytest

from ecgdenoise.annotations import WAVE_TYPES, WaveAnnotation
from ecgdenoise.autoencoder import (AutoencoderConfig, TrainConfig, denoise_array,
                                    denoise_segment, init_weights, train)
from ecgdenoise.delineation import (classify_intervals, classify_normality, classify_peaks,
                                    composite_peak_wave, delineation_error_count,
                                    interval_outcomes, interval_overlap, match_waves,
                                    normality_outcomes, peak_outcomes, reference_delineate)
from ecgdenoise.filters import denoise_with_preset, design_butterworth, zero_phase_filter
from ecgdenoise.metrics import (cosine_distance, mad, noise_removed_fraction, signal_power,
                                signal_power_log, snr, ssd, summarize_stats)
from ecgdenoise.noise import (CLEAN_CLEAN, LINEAR, NOISE_KINDS, NOISY_CLEAN, SINE, WHITE,
                              NoiseConfig, SineWanderSpec, apply_sine_wander, build_dataset,
                              noise_components, sample_noise_plan)
from ecgdenoise.report import COLUMNS, read_report_csv, run_report
from ecgdenoise.segment import EcgSegment
from ecgdenoise.seeding import derive_seed
from ecgdenoise.synth import SynthParams, synth_clean_ecg, synth_corpus
from oracles import exhaustive_assignment, finite_difference_errors

FS = 500.0
WANDER = NoiseConfig(menu=(SINE, LINEAR))


def _raises(fn, *args):
    try:
        fn(*args)
    except ValueError:
        return True
    return False


# -- AC1 --------------------------------------------------------------------------

def test_ac1_metric_identities(acceptance):
    t0 = time.perf_counter()

    def rel(a, b):
        return abs(a - b) <= 1e-9 * abs(b)

    s1, s4 = summarize_stats([5]), summarize_stats([1, 2, 3, 4])
    rng = np.random.default_rng(0)
    rand_ok = True
    for _ in range(50):
        x, y = rng.standard_normal((2, 20))
        s = summarize_stats(x)
        rand_ok &= ssd(x, y) == ssd(y, x) and mad(x, y) == mad(y, x)
        rand_ok &= s.min <= s.q25 <= s.q50 <= s.q75 <= s.max
    checks = {
        "power [0,0,0] = 0": signal_power([0, 0, 0]) == 0,
        "log power [0,0,0] errors": _raises(signal_power_log, [0, 0, 0]),
        "power [1,2] = 5": signal_power([1, 2]) == 5,
        "log power [1] = 0 dB": signal_power_log([1]) == 0,
        "snr identical = 0": snr([1, 2, 3], [1, 2, 3]) == 0,
        "snr [1] vs [3]": rel(snr([1], [3]), 10 * math.log10(1 / 9)),
        "snr antisymmetry": rel(snr([3], [1]), -10 * math.log10(1 / 9)),
        "ssd X=X": ssd([1, 2], [1, 2]) == 0,
        "ssd [1,2],[0,0] = 5": ssd([1, 2], [0, 0]) == 5,
        "mad X=X": mad([1, 5], [1, 5]) == 0,
        "mad [1,5],[2,2] = 3": mad([1, 5], [2, 2]) == 3,
        "cosdist X=X": abs(cosine_distance([1, 2, 3], [1, 2, 3])) <= 1e-15,
        "cosdist orthogonal = 1": cosine_distance([1, 0], [0, 1]) == 1,
        "cosdist antiparallel = 2": cosine_distance([1], [-1]) == 2,
        "removed cleaned 0 = 1": noise_removed_fraction(3.0, 0.0) == 1.0,
        "removed cleaned = added -> 0": noise_removed_fraction(3.0, 3.0) == 0.0,
        "removed 10, 15 -> -0.5": noise_removed_fraction(10.0, 15.0) == -0.5,
        "summary [5]": s1.as_tuple() == (5, 0, 5, 5, 5, 5, 5),
        "summary [1,2,3,4]": (s4.mean == 2.5 and rel(s4.std_dev, math.sqrt(5 / 3))
                              and (s4.q25, s4.q50, s4.q75) == (1.75, 2.5, 3.25)),
        "random symmetry and ordering": bool(rand_ok),
    }
    elapsed = time.perf_counter() - t0
    failed = [k for k, v in checks.items() if not v]
    ok = not failed and elapsed < 1.0
    acceptance("AC1 metric identity suite", ok,
               f"{len(checks) - len(failed)}/{len(checks)} examples, {elapsed:.3f} s (< 1 s)"
               + (f"; failed: {failed}" if failed else ""))
    assert ok


# -- AC2 --------------------------------------------------------------------------

def _sample_plans(count):
    leads = ("I", "II", "III", "aVR", "aVL", "aVF")
    plans = []
    for i in range(count):
        rng = np.random.default_rng(derive_seed(2024, "ac2", i))
        plans.append(sample_noise_plan(rng, leads, 5000, NOISE_KINDS, sample_rate=FS,
                                       require_noise=True))
    return plans


def test_ac2_noise_constraint_sweep(acceptance):
    t0 = time.perf_counter()
    n = 5000
    min_cov = {SINE: 0.6 * n, LINEAR: 0.6 * n, WHITE: 0.2 * n}
    plans = _sample_plans(1000)
    violations, checked = 0, 0
    for plan in plans:
        for _, spec in plan.entries:
            if spec.kind in min_cov:
                checked += 1
                violations += (spec.end - spec.start) < min_cov[spec.kind]
    again = _sample_plans(1000)
    same_plans = all(json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(),
                                                                           sort_keys=True)
                     for a, b in zip(plans, again))
    base = EcgSegment(("I", "II", "III", "aVR", "aVL", "aVF"), np.zeros((6, n)), FS, "z")
    same_noise = all(noise_components(base, a).tobytes() == noise_components(base, b).tobytes()
                     for a, b in zip(plans[:100], again[:100]))
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and checked > 0 and same_plans and same_noise and elapsed < 10
    acceptance("AC2 noise-constraint sweep", ok,
               f"1000 plans, {checked} windowed components, {violations} violations, "
               f"regeneration identical={same_plans and same_noise}, {elapsed:.2f} s (< 10 s)")
    assert ok


# -- AC3 --------------------------------------------------------------------------

def test_ac3_leakage(acceptance):
    t0 = time.perf_counter()
    segs = [s for s, _ in synth_corpus(40, master_seed=3, duration=2.0)]
    all_ids = {s.segment_id for s in segs}
    rng = np.random.default_rng(33)
    disjoint = covered = counts = True
    for _ in range(100):
        frac = float(rng.uniform(0, 1))
        pairs = build_dataset(segs, frac, "train", int(rng.integers(0, 2**31)), WANDER)
        cc = {p.source_id for p in pairs if p.kind == CLEAN_CLEAN}
        noisy = {p.source_id for p in pairs if p.kind == NOISY_CLEAN}
        disjoint &= not (cc & noisy)
        covered &= (cc | noisy) == all_ids
        counts &= len(cc) == math.floor(frac * len(segs) + 0.5)
    elapsed = time.perf_counter() - t0
    ok = disjoint and covered and counts and elapsed < 10
    acceptance("AC3 leakage", ok,
               f"100 builds, disjoint={disjoint}, complete={covered}, counts={counts}, "
               f"{elapsed:.2f} s (< 10 s)")
    assert ok


# -- AC4 --------------------------------------------------------------------------

def test_ac4_gradient_check(acceptance):
    t0 = time.perf_counter()
    cfg = AutoencoderConfig(encoder_channels=(2, 3), decoder_channels=(3, 2), kernel_size=3)
    rng = np.random.default_rng(4)
    w = init_weights(cfg, seed=4)
    for b in w.biases:
        b[:] = 0.1 * rng.standard_normal(b.shape)
    x = rng.standard_normal((2, 2, 32))
    t = rng.standard_normal((2, 2, 32))
    errs = finite_difference_errors(w, cfg, x, t, h=1e-5)
    elapsed = time.perf_counter() - t0
    ok = errs.size == w.n_parameters() and errs.max() < 1e-4 and elapsed < 30
    acceptance("AC4 gradient check", ok,
               f"{errs.size} parameters, max relative error {errs.max():.2e} (< 1e-4), "
               f"{elapsed:.2f} s (< 30 s)")
    assert ok


# -- shared desk-scale model --------------------------------------------------------

@pytest.fixture(scope="module")
def desk_model():
    """Desk config trained on 200 wander-noised synthetic pairs for 20 epochs."""
    t0 = time.perf_counter()
    segs = [s for s, _ in synth_corpus(250, master_seed=0)]
    train_pairs = build_dataset(segs[:200], 0.2, "train", 0, WANDER)
    held_out = build_dataset(segs[200:], 0.0, "test", 0, WANDER)
    cfg = AutoencoderConfig.desk()
    weights, history = train(train_pairs, cfg, TrainConfig(epochs=20, batch_size=8,
                                                           learning_rate=3e-3,
                                                           crop_length=1024))
    return dict(cfg=cfg, weights=weights, history=history, held_out=held_out,
                n_train=len(train_pairs), train_seconds=time.perf_counter() - t0)


# -- AC5 --------------------------------------------------------------------------

@pytest.mark.slow
def test_ac5_training_effect(acceptance, desk_model):
    t0 = time.perf_counter()
    cfg, w = desk_model["cfg"], desk_model["weights"]
    held_out = desk_model["held_out"]
    fractions, noisy_ssd, clean_ssd = [], [], []
    for pair in held_out:
        x = pair.input.select(cfg.input_leads).data
        t = pair.target.select(cfg.input_leads).data
        y = denoise_array(w, cfg, x)
        noisy_ssd.append(ssd(x, t))
        clean_ssd.append(ssd(y, t))
        fractions.append(noise_removed_fraction(noisy_ssd[-1], clean_ssd[-1]))
    median = float(np.median(fractions))
    ratio = float(np.median(clean_ssd) / np.median(noisy_ssd))
    elapsed = desk_model["train_seconds"] + time.perf_counter() - t0
    ok = (desk_model["n_train"] == 200 and len(held_out) == 50
          and len(desk_model["history"]) <= 20 and median >= 0.4 and ratio <= 0.6
          and elapsed < 600)
    acceptance("AC5 desk-scale training effect", ok,
               f"200 pairs, {len(desk_model['history'])} epochs, 50 held out: median "
               f"noise_removed_fraction {median:.3f} (>= 0.4), median SSD ratio {ratio:.3f} "
               f"(<= 0.6), {elapsed:.0f} s (< 600 s)")
    assert ok


# -- AC6 --------------------------------------------------------------------------

def _xcorr_lag(a, b, max_lag=50):
    n = len(a)
    lags = list(range(-max_lag, max_lag + 1))
    scores = [np.dot(a[max(0, -L):n - max(0, L)], b[max(0, L):n - max(0, -L)]) for L in lags]
    return lags[int(np.argmax(scores))]


def _gain_db(sos, f):
    z = np.exp(-2j * np.pi * f / FS)
    h = 1.0 + 0j
    for b0, b1, b2, a0, a1, a2 in sos:
        h *= (b0 + b1 * z + b2 * z * z) / (a0 + a1 * z + a2 * z * z)
    return 20 * np.log10(abs(h))


def _band_power(x, lo, hi):
    spec = np.abs(np.fft.rfft(x)) ** 2
    f = np.fft.rfftfreq(len(x), 1 / FS)
    return spec[(f >= lo) & (f <= hi)].sum()


def test_ac6_zero_phase_filters(acceptance):
    t0 = time.perf_counter()
    worst = 0.0
    for kind, cut in (("lowpass", 40.0), ("highpass", 0.5), ("lowpass", 100.0),
                      ("bandpass", (1.0, 40.0)), ("bandstop", (45.0, 55.0))):
        for order in (1, 2, 4, 6):
            d = design_butterworth(kind, order, cut, FS)
            for fc in np.atleast_1d(cut):
                worst = max(worst, abs(_gain_db(d.sos, fc) + 3.0103))
    t = np.arange(5000) / FS
    sine = np.sin(2 * np.pi * 5 * t)
    y = zero_phase_filter(design_butterworth("bandpass", 2, (1, 40), FS), sine, FS)
    lag = _xcorr_lag(sine[1000:4000], y[1000:4000])

    clean, _ = synth_clean_ecg(SynthParams(heart_rate=90), 10.0, FS)
    noisy = apply_sine_wander(clean, "II", SineWanderSpec(0, clean.n_samples, 0.4, 0.5, 0.3))
    out = denoise_with_preset("butterworth", noisy)
    before = _band_power(noisy.lead("II") - clean.lead("II"), 0.4, 0.6)
    after = _band_power(out.lead("II") - clean.lead("II"), 0.4, 0.6)
    reduction = 1 - after / before
    elapsed = time.perf_counter() - t0
    ok = worst <= 0.1 and lag == 0 and reduction >= 0.9 and elapsed < 10
    acceptance("AC6 zero-phase filter suite", ok,
               f"max |gain(fc) + 3.01 dB| {worst:.2e} dB (<= 0.1), in-band lag {lag} samples, "
               f"0.5 Hz wander reduction {100 * reduction:.2f}% (>= 90%), {elapsed:.2f} s (< 10 s)")
    assert ok


# -- AC7 --------------------------------------------------------------------------

def _w(kind, peak, onset=None, offset=None, normal=True):
    return WaveAnnotation(kind, peak, peak - 5 if onset is None else onset,
                          peak + 5 if offset is None else offset, normal)


def _random_case(rng, thr):
    spacing = 2 * thr + 1
    truth, pred = [], []
    for kind in WAVE_TYPES:
        for slot in rng.choice(12, size=rng.integers(0, 6), replace=False):
            truth.append(_w(kind, 100 + int(slot) * spacing))
        for slot in rng.choice(12, size=rng.integers(0, 6), replace=False):
            off = int(rng.integers(-thr - 5, thr + 6))
            pred.append(_w(kind, 100 + int(slot) * spacing + off))
    key = lambda a: a.peak  # noqa: E731
    return sorted(truth, key=key), sorted(pred, key=key)


def _delineation_examples():
    thr = 75

    def one(truth, pred):
        return match_waves([truth], [pred], thr)

    def tup(c):
        return c.tp, c.fp, c.fn, c.tn

    m_exact = one(_w("QRS", 100), _w("QRS", 100))
    m_shift = one(_w("QRS", 100), _w("QRS", 102))
    m_06 = one(_w("QRS", 12, 12, 18), _w("QRS", 12, 10, 20))
    m_09 = one(_w("QRS", 1, 1, 10), _w("QRS", 1, 0, 10))
    m_rev = one(_w("QRS", 12, 10, 20), _w("QRS", 12, 12, 18))
    m_int_bad = one(_w("QRS", 100, 95, 105), _w("QRS", 100, 90, 130))
    m_norm = one(_w("T", 300, normal=False), _w("T", 300, normal=True))
    closest = match_waves([_w("QRS", 100)], [_w("QRS", 90), _w("QRS", 200)], thr)

    def norm(t, p):
        return tup(classify_normality(one(_w("P", 50, normal=t), _w("P", 50, normal=p)))["P"])

    def comp(m):
        return composite_peak_wave(m, peak_outcomes(m, 1), interval_outcomes(m),
                                   normality_outcomes(m))

    (c_ok, agree_ok), (c_bad, agree_bad), (c_norm, agree_norm) = (
        comp(m_exact), comp(m_int_bad), comp(m_norm))
    truth3 = [_w("P", 20), _w("QRS", 100, 80, 125), _w("T", 250, 210, 300)]
    spurious = WaveAnnotation("QRS", 5000, 4990, 5010, normal=False)
    return {
        "identity match": match_waves(truth3, truth3, thr).distances() == [0, 0, 0],
        "closest of {90, 200}": [(p.peak, d) for _, p, d in closest.pairs] == [(90, 10)],
        "type partition": not match_waves([_w("P", 100)], [_w("QRS", 100)], thr).pairs,
        "peak exact -> tp": tup(classify_peaks(m_exact, 1)["QRS"]) == (1, 0, 0, 0),
        "peak 102 vs 100 -> fp+fn": tup(classify_peaks(m_shift, 1)["QRS"]) == (0, 1, 1, 0),
        "truth without prediction -> fn":
            tup(classify_peaks(match_waves([_w("T", 9)], [], thr), 1)["T"]) == (0, 0, 1, 0),
        "overlap identical": interval_overlap((10, 20), (10, 20)) == (1.0, 1.0),
        "overlap (0.6, 1.0)": interval_overlap((10, 20), (12, 18)) == (0.6, 1.0),
        "overlap disjoint": interval_overlap((0, 5), (5, 9)) == (0.0, 0.0),
        "interval identical -> tp": tup(classify_intervals(m_exact)["QRS"]) == (1, 0, 0, 0),
        "interval (0.9, 1.0) -> tp": tup(classify_intervals(m_09)["QRS"]) == (1, 0, 0, 0),
        "interval (0.6, 1.0) -> fp+fn": tup(classify_intervals(m_06)["QRS"]) == (0, 1, 1, 0),
        "80% of both: (1.0, 0.6) -> fp+fn":
            tup(classify_intervals(m_rev)["QRS"]) == (0, 1, 1, 0),
        "normality abnormal/abnormal -> tp": norm(False, False) == (1, 0, 0, 0),
        "normality normal/normal -> tn": norm(True, True) == (0, 0, 0, 1),
        "normality normal/abnormal -> fp": norm(True, False) == (0, 1, 0, 0),
        "normality abnormal/normal -> fn": norm(False, True) == (0, 0, 1, 0),
        "composite all correct": tup(c_ok["QRS"]) == (1, 0, 0, 0) and agree_ok == 1,
        "composite peak tp, interval fp -> fp": c_bad["QRS"].fp == 1 and agree_bad == 0,
        "composite normality wrong -> tp, no agreement":
            tup(c_norm["T"]) == (1, 0, 0, 0) and agree_norm == 0,
        "error count identity = 0": delineation_error_count(truth3, truth3) == 0,
        "spurious QRS -> peak fp + interval fp":
            delineation_error_count(truth3, truth3 + [spurious]) == 2,
    }


def test_ac7_delineation_metric_oracle(acceptance):
    t0 = time.perf_counter()
    thr = 75
    rng = np.random.default_rng(7)
    mismatches = 0
    for _ in range(200):
        truth, pred = _random_case(rng, thr)
        m = match_waves(truth, pred, thr)
        tid = {id(a): i for i, a in enumerate(truth)}
        pid = {id(a): i for i, a in enumerate(pred)}
        greedy = {(tid[id(t)], pid[id(p)]) for t, p, _ in m.pairs}
        mismatches += greedy != exhaustive_assignment(truth, pred, thr)
    examples = _delineation_examples()
    failed = [k for k, v in examples.items() if not v]
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and not failed and elapsed < 30
    acceptance("AC7 delineation-metric oracle", ok,
               f"200 random cases, {mismatches} greedy/exhaustive mismatches; "
               f"{len(examples) - len(failed)}/{len(examples)} examples exact, "
               f"{elapsed:.2f} s (< 30 s)" + (f"; failed: {failed}" if failed else ""))
    assert ok


# -- AC8 --------------------------------------------------------------------------

@pytest.mark.slow
def test_ac8_end_to_end_improvement(acceptance, desk_model):
    t0 = time.perf_counter()
    cfg, w = desk_model["cfg"], desk_model["weights"]
    segs = [s for s, _ in synth_corpus(100, master_seed=99, id_prefix="e2e")]
    noise = NoiseConfig(menu=(SINE, LINEAR), required_leads=("II",))
    pairs = build_dataset(segs, 0.0, "test", 5, noise)
    rows = []
    for pair in pairs:
        # truth is the reference delineation of the clean signal, so the only
        # difference between the three scores is the signal being delineated
        truth = reference_delineate(pair.target)
        noisy = delineation_error_count(truth, reference_delineate(pair.input))
        ae = delineation_error_count(
            truth, reference_delineate(denoise_segment(w, cfg, pair.input)))
        elg = delineation_error_count(
            truth, reference_delineate(denoise_with_preset("elgendi2010", pair.input)))
        rows.append((noisy, ae, elg))
    r = np.array(rows, dtype=float)
    improved = float(np.mean(r[:, 1] < r[:, 0]))
    means = r.mean(axis=0)
    elapsed = desk_model["train_seconds"] + time.perf_counter() - t0
    ok = len(pairs) == 100 and improved >= 0.7 and means[1] < means[2] and elapsed < 900
    acceptance("AC8 end-to-end improvement", ok,
               f"100 segments: strict reduction in {100 * improved:.0f}% (>= 70%); mean errors "
               f"noisy {means[0]:.2f}, autoencoder {means[1]:.2f}, elgendi2010 {means[2]:.2f}; "
               f"{elapsed:.0f} s (< 900 s)")
    assert ok


# -- AC9 --------------------------------------------------------------------------

def test_ac9_report_schema(acceptance, tmp_path):
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    groups = {"Autoencoder": rng.standard_normal(50).tolist(),
              "Butterworth Filter": (rng.standard_normal(50) * 1e-7).tolist(),
              "elgendi2010": [0.1, 1 / 3, 2.0 ** -40]}
    rows = run_report(groups, tmp_path / "table")
    header = (tmp_path / "table.csv").read_text().splitlines()[0].split(",")[1:]
    back = read_report_csv(tmp_path / "table.csv")
    lossless = ([n for n, _ in back] == list(groups)
                and all(a.as_tuple() == b.as_tuple() for (_, a), (_, b) in zip(rows, back)))
    text_header = (tmp_path / "table.txt").read_text().splitlines()[0]
    text_ok = all(col in text_header for col in COLUMNS)
    elapsed = time.perf_counter() - t0
    expected = ["Mean", "Std Dev", "Min", "25%", "50%", "75%", "Max"]
    ok = header == expected and lossless and text_ok and elapsed < 1.0
    acceptance("AC9 report schema", ok,
               f"columns {header}, CSV round trip lossless={lossless}, {elapsed:.3f} s (< 1 s)")
    assert ok
