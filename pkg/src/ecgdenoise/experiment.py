"""Experiment configuration and the stages run by the command line.

Every stage reads and writes files under ``config.output_dir``::

    corpus/             clean segments (annotations in the sidecars) + manifest.json
    datasets/<split>/   (input, target) pairs, noise plans, manifest.json
    model.ckpt          autoencoder weights; training.json holds the loss history
    denoised/<name>/    denoised evaluation inputs, one CSV per pair
    eval/               signal.json and delineation.json (per-pair values)
    reports/            summary tables, CSV and aligned text
    plots/              SVG figures

All randomness comes from ``master_seed``; stage seeds are derived by hashing.
Evaluation stages only read dataset and denoised files.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .autoencoder import (AutoencoderConfig, TrainConfig, denoise_segment, load_weights,
                          save_weights, train)
from .delineation import Thresholds, reference_delineate, score_delineation
from .filters import PRESET_LABELS, denoise_with_preset, load_presets
from .metrics import cosine_distance, mad, noise_removed_fraction, ssd
from .noise import SPLITS, NoiseConfig, build_dataset, load_dataset, save_dataset
from .report import run_report, render_plot
from .seeding import derive_seed
from .segment import load_segment, save_segment
from .synth import synth_corpus

AUTOENCODER = "autoencoder"
SIGNAL_METRICS = {"SSD": ssd, "MAD": mad, "COSDIST": cosine_distance}


class ConfigError(ValueError):
    """Invalid experiment configuration (a usage error)."""


class DataError(ValueError):
    """Missing or inconsistent files between stages."""


def denoiser_label(name: str) -> str:
    if name == AUTOENCODER:
        return "Autoencoder"
    return PRESET_LABELS.get(name, name)


def _default_splits():
    return {"train": {"fraction": 0.8, "seed": None}, "test": {"fraction": 0.2, "seed": None}}


@dataclass(frozen=True)
class ExperimentConfig:
    master_seed: int = 0
    output_dir: str = "ecgdenoise-run"
    corpus_dir: str | None = None  # external corpus; default output_dir/corpus
    n_segments: int = 250
    duration: float = 10.0
    sample_rate: float = 500.0
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    clean_clean_fraction: float = 0.2
    splits: dict = field(default_factory=_default_splits)
    eval_split: str = "test"
    train_split: str = "train"
    model: AutoencoderConfig = field(default_factory=AutoencoderConfig.desk)
    training: TrainConfig = field(default_factory=lambda: TrainConfig(
        epochs=20, batch_size=8, learning_rate=3e-3, crop_length=1024))
    checkpoint: str | None = None  # default output_dir/model.ckpt
    denoisers: tuple[str, ...] = (AUTOENCODER, "butterworth", "elgendi2010")
    thresholds: Thresholds = field(default_factory=Thresholds)
    report_formats: tuple[str, ...] = ("csv", "txt")

    def __post_init__(self):
        if not 0.0 <= self.clean_clean_fraction <= 1.0:
            raise ConfigError("clean_clean_fraction must be in [0, 1]")
        if self.n_segments < 1:
            raise ConfigError("n_segments must be >= 1")
        splits = {}
        for name, spec in self.splits.items():
            if isinstance(spec, (int, float)):
                spec = {"fraction": spec, "seed": None}
            if name not in SPLITS:
                raise ConfigError(f"split names must be among {SPLITS}, got {name!r}")
            frac = float(spec.get("fraction", 0.0))
            if not 0.0 <= frac <= 1.0:
                raise ConfigError(f"split {name!r}: fraction must be in [0, 1]")
            splits[str(name)] = {"fraction": frac, "seed": spec.get("seed")}
        if sum(s["fraction"] for s in splits.values()) > 1.0 + 1e-9:
            raise ConfigError("split fractions sum to more than 1")
        object.__setattr__(self, "splits", splits)
        for split in (self.eval_split, self.train_split):
            if split not in splits:
                raise ConfigError(f"unknown split {split!r}; configured: {', '.join(splits)}")
        denoisers = tuple(self.denoisers)
        presets = load_presets()
        for name in denoisers:
            if name != AUTOENCODER and name not in presets:
                raise ConfigError(f"unknown denoiser {name!r}; choose {AUTOENCODER!r} or one of: "
                                  f"{', '.join(sorted(presets))}")
        object.__setattr__(self, "denoisers", denoisers)
        if set(self.report_formats) - {"csv", "txt"}:
            raise ConfigError("report_formats may contain only 'csv' and 'txt'")
        object.__setattr__(self, "report_formats", tuple(self.report_formats))

    # paths
    @property
    def root(self) -> Path:
        return Path(self.output_dir)

    @property
    def corpus_path(self) -> Path:
        return Path(self.corpus_dir) if self.corpus_dir else self.root / "corpus"

    @property
    def checkpoint_path(self) -> Path:
        return Path(self.checkpoint) if self.checkpoint else self.root / "model.ckpt"

    def dataset_path(self, split: str) -> Path:
        return self.root / "datasets" / split

    def denoised_path(self, denoiser: str) -> Path:
        return self.root / "denoised" / denoiser

    def split_seed(self, split: str) -> int:
        seed = self.splits[split]["seed"]
        return self.master_seed if seed is None else int(seed)

    # serialization
    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["noise"] = self.noise.to_dict()
        d["model"] = self.model.to_dict()
        d["training"] = self.training.to_dict()
        d["thresholds"] = self.thresholds.to_dict()
        d["denoisers"] = list(self.denoisers)
        d["report_formats"] = list(self.report_formats)
        return json.loads(json.dumps(d))

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
        try:
            if "noise" in d:
                d["noise"] = NoiseConfig.from_dict(d["noise"])
            if "model" in d:
                d["model"] = AutoencoderConfig.from_dict(d["model"])
            if "training" in d:
                d["training"] = TrainConfig(**d["training"])
            if "thresholds" in d:
                d["thresholds"] = Thresholds(**d["thresholds"])
            return cls(**d)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config: {exc}") from None

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            d = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(d)

    def with_overrides(self, overrides: dict) -> "ExperimentConfig":
        """Apply ``{"a.b": value}`` overrides on top of the serialized config."""
        d = self.to_dict()
        for key, value in overrides.items():
            node = d
            parts = key.split(".")
            for p in parts[:-1]:
                if not isinstance(node.get(p), dict):
                    raise ConfigError(f"cannot set {key!r}: {p!r} is not a section")
                node = node[p]
            node[parts[-1]] = value
        return type(self).from_dict(d)


def _write_json(path: Path, obj) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")
    return path


def _read_json(path: Path):
    if not path.exists():
        raise DataError(f"missing {path}; run the earlier stage first")
    return json.loads(path.read_text())


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


# -- stages -----------------------------------------------------------------

def stage_synth(cfg: ExperimentConfig) -> Path:
    """Generate the clean synthetic corpus with ground-truth annotations."""
    out = cfg.root / "corpus"
    corpus = synth_corpus(cfg.n_segments, derive_seed(cfg.master_seed, "corpus"), cfg.duration,
                          cfg.sample_rate)
    ids = []
    for seg, ann in corpus:
        save_segment(seg, out / f"{seg.segment_id}.csv", annotations=ann)
        ids.append(seg.segment_id)
    return _write_json(out / "manifest.json", {"segments": ids, "master_seed": cfg.master_seed})


def load_corpus(cfg: ExperimentConfig):
    path = cfg.corpus_path
    manifest = path / "manifest.json"
    if manifest.exists():
        files = [path / f"{sid}.csv" for sid in json.loads(manifest.read_text())["segments"]]
    else:
        files = sorted(path.glob("*.csv"))
    if not files:
        raise DataError(f"no segments found in {path}")
    return [load_segment(f) for f in files]


def assign_splits(cfg: ExperimentConfig, segment_ids) -> dict[str, list[str]]:
    """Deterministic disjoint split of the corpus by segment ID."""
    ids = sorted(segment_ids)
    rng = np.random.default_rng(derive_seed(cfg.master_seed, "splits"))
    order = [ids[i] for i in rng.permutation(len(ids))]
    out, start = {}, 0
    for name, spec in cfg.splits.items():
        k = _round_half_up(spec["fraction"] * len(ids))
        out[name] = sorted(order[start:start + k])
        start += k
    return out


def stage_build_dataset(cfg: ExperimentConfig, splits=None) -> dict[str, Path]:
    segments = {s.segment_id: s for s in load_corpus(cfg)}
    if len(segments) < 1:
        raise DataError("empty corpus")
    assignment = assign_splits(cfg, segments)
    written = {}
    for split in splits or cfg.splits:
        if split not in cfg.splits:
            raise ConfigError(f"unknown split {split!r}; configured: {', '.join(cfg.splits)}")
        segs = [segments[i] for i in assignment[split]]
        seed = cfg.split_seed(split)
        pairs = build_dataset(segs, cfg.clean_clean_fraction, split, seed, cfg.noise)
        written[split] = save_dataset(pairs, cfg.dataset_path(split), split, seed)
    return written


def _load_split(cfg: ExperimentConfig, split: str):
    path = cfg.dataset_path(split)
    if not (path / "manifest.json").exists():
        raise DataError(f"missing dataset {path}; run build-dataset first")
    pairs = load_dataset(path)
    if not pairs:
        raise DataError(f"dataset {path} is empty")
    return pairs


def stage_train(cfg: ExperimentConfig) -> Path:
    pairs = _load_split(cfg, cfg.train_split)
    weights, history = train(pairs, cfg.model, cfg.training)
    path = cfg.checkpoint_path
    path.parent.mkdir(parents=True, exist_ok=True)
    save_weights(weights, path, cfg.model)
    _write_json(cfg.root / "training.json",
                {"loss": history, "n_pairs": len(pairs), "training": cfg.training.to_dict()})
    return path


def _denoise_fn(cfg: ExperimentConfig, name: str):
    if name == AUTOENCODER:
        if not cfg.checkpoint_path.exists():
            raise DataError(f"missing checkpoint {cfg.checkpoint_path}; run train first")
        weights = load_weights(cfg.checkpoint_path, cfg.model)
        return lambda seg: denoise_segment(weights, cfg.model, seg)
    return lambda seg: denoise_with_preset(name, seg)


def stage_denoise(cfg: ExperimentConfig, denoisers=None) -> dict[str, Path]:
    pairs = _load_split(cfg, cfg.eval_split)
    out = {}
    for name in denoisers or cfg.denoisers:
        fn = _denoise_fn(cfg, name)
        directory = cfg.denoised_path(name)
        ids = []
        for pair in pairs:
            save_segment(fn(pair.input), directory / f"{pair.pair_id}.csv")
            ids.append(pair.pair_id)
        out[name] = _write_json(directory / "manifest.json",
                                {"denoiser": name, "split": cfg.eval_split, "pairs": ids})
    return out


def _load_denoised(cfg: ExperimentConfig, name: str, pair_id: str):
    path = cfg.denoised_path(name) / f"{pair_id}.csv"
    if not path.exists():
        raise DataError(f"missing {path}; run denoise first")
    return load_segment(path)


def _metric_leads(cfg: ExperimentConfig):
    return cfg.model.input_leads


def stage_eval_signal(cfg: ExperimentConfig) -> Path:
    """Waveform metrics right after denoising.

    Clean-clean pairs record the raw metrics between output and target; noisy
    pairs record the fraction of the added metric that the denoiser removed.
    """
    leads = _metric_leads(cfg)
    records = []
    for pair in _load_split(cfg, cfg.eval_split):
        target = pair.target.select(leads).data
        noisy = pair.input.select(leads).data
        rec = {"id": pair.pair_id, "kind": pair.kind, "added": {}, "denoisers": {}}
        for m, fn in SIGNAL_METRICS.items():
            rec["added"][m] = fn(noisy, target)
        for name in cfg.denoisers:
            out = _load_denoised(cfg, name, pair.pair_id).select(leads).data
            vals = {}
            for m, fn in SIGNAL_METRICS.items():
                cleaned = fn(out, target)
                vals[m] = cleaned
                if pair.kind != "clean-clean":
                    added = rec["added"][m]
                    vals[m + "_removed"] = (noise_removed_fraction(added, cleaned)
                                            if added > 0 else None)
            rec["denoisers"][name] = vals
        records.append(rec)
    return _write_json(cfg.root / "eval" / "signal.json",
                       {"split": cfg.eval_split, "leads": list(leads), "pairs": records})


def stage_eval_delineation(cfg: ExperimentConfig) -> Path:
    """Delineation errors against the reference delineation of the clean target."""
    sr = None
    records = []
    for pair in _load_split(cfg, cfg.eval_split):
        sr = pair.target.sample_rate
        truth = reference_delineate(pair.target)
        rec = {"id": pair.pair_id, "kind": pair.kind,
               "input": score_delineation(truth, reference_delineate(pair.input), sr,
                                          cfg.thresholds),
               "denoisers": {}}
        for name in cfg.denoisers:
            out = _load_denoised(cfg, name, pair.pair_id)
            rec["denoisers"][name] = score_delineation(truth, reference_delineate(out), sr,
                                                       cfg.thresholds)
        records.append(rec)
    return _write_json(cfg.root / "eval" / "delineation.json",
                       {"split": cfg.eval_split, "thresholds": cfg.thresholds.to_dict(),
                        "pairs": records})


def report_tables(cfg: ExperimentConfig) -> dict[str, list[tuple[str, list[float]]]]:
    """Per-segment values grouped by denoiser for each report table."""
    tables: dict[str, list[tuple[str, list[float]]]] = {}
    signal = _read_json(cfg.root / "eval" / "signal.json")["pairs"]
    delin = _read_json(cfg.root / "eval" / "delineation.json")["pairs"]
    for kind in ("clean", "noisy"):
        recs = [r for r in signal if (r["kind"] == "clean-clean") == (kind == "clean")]
        for m in SIGNAL_METRICS:
            key = m if kind == "clean" else m + "_removed"
            groups = []
            for name in cfg.denoisers:
                vals = [r["denoisers"][name][key] for r in recs]
                groups.append((denoiser_label(name), [v for v in vals if v is not None]))
            if any(v for _, v in groups):
                tables[f"signal_{kind}_{m}"] = groups
        drecs = [r for r in delin if (r["kind"] == "clean-clean") == (kind == "clean")]
        groups = [(denoiser_label(name), [r["denoisers"][name]["errors"] for r in drecs])
                  for name in cfg.denoisers]
        if any(v for _, v in groups):
            tables[f"delineation_{kind}_errors"] = groups
    return tables


def stage_report(cfg: ExperimentConfig) -> list[Path]:
    written = []
    for name, groups in report_tables(cfg).items():
        stem = cfg.root / "reports" / name
        run_report(groups, stem)
        for fmt in ("csv", "txt"):
            path = stem.with_suffix("." + fmt)
            if fmt in cfg.report_formats:
                written.append(path)
            else:
                path.unlink()
    return written


def stage_plot(cfg: ExperimentConfig, pair_id: str | None = None, denoiser: str | None = None,
               leads=None) -> Path:
    """Plot one evaluation pair (noisy input, or a denoiser's output) with the
    reference delineation of that signal shaded."""
    pairs = _load_split(cfg, cfg.eval_split)
    by_id = {p.pair_id: p for p in pairs}
    if pair_id is None:
        pair_id = pairs[0].pair_id
    if pair_id not in by_id:
        raise DataError(f"pair {pair_id!r} not in split {cfg.eval_split!r}")
    if denoiser is None or denoiser == "input":
        seg, tag = by_id[pair_id].input, "input"
    elif denoiser == "target":
        seg, tag = by_id[pair_id].target, "target"
    else:
        seg, tag = _load_denoised(cfg, denoiser, pair_id), denoiser
    ann = reference_delineate(seg)
    title = f"{pair_id} ({tag if tag in ('input', 'target') else denoiser_label(tag)})"
    return render_plot(seg, cfg.root / "plots" / f"{pair_id}_{tag}.svg", ann,
                       leads=leads, title=title)


def stage_pipeline(cfg: ExperimentConfig) -> list[Path]:
    """synth (unless an external corpus is configured), build-dataset, train
    (when the autoencoder is selected), denoise, both evaluations and reports."""
    if cfg.corpus_dir is None:
        stage_synth(cfg)
    stage_build_dataset(cfg)
    if AUTOENCODER in cfg.denoisers:
        stage_train(cfg)
    stage_denoise(cfg)
    stage_eval_signal(cfg)
    stage_eval_delineation(cfg)
    return stage_report(cfg)
