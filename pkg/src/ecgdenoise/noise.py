"""Additive noise transforms, random noise plans and (input, target) datasets.

Four noise families are modelled, each applied to one lead inside a window:

* ``SineWander``: respiratory baseline wander, a sinusoid.
* ``WhiteNoise`` (alias ``MuscleArtifact``): zero-order-hold uniform noise.
* ``LinearWander``: a ramp that starts at zero at the window start.
* ``ShockPulses``: single-period sine bursts.

All transforms are additive and local: outside their window, and on any other
lead, the signal is returned unchanged.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import ClassVar, Iterable, Sequence

import numpy as np

from .segment import EcgSegment, load_segment, save_segment
from .seeding import derive_seed

SINE = "SineWander"
WHITE = "WhiteNoise"
LINEAR = "LinearWander"
SHOCK = "ShockPulses"
NOISE_KINDS = (LINEAR, WHITE, SHOCK, SINE)
KIND_ALIASES = {"MuscleArtifact": WHITE}

CLEAN_CLEAN = "clean-clean"
NOISY_CLEAN = "noisy-clean"
SPLITS = ("train", "val", "test")


class NoiseError(ValueError):
    pass


def canonical_kind(name: str) -> str:
    name = KIND_ALIASES.get(name, name)
    if name not in NOISE_KINDS:
        raise NoiseError(f"unknown noise kind {name!r}; expected one of {NOISE_KINDS}")
    return name


def parse_menu(menu) -> tuple[str, ...]:
    """Accept an iterable of kind names or a dash-joined string like
    ``"LinearWander-MuscleArtifact-ShockPulses-SineWander"``."""
    if isinstance(menu, str):
        menu = [m for m in menu.split("-") if m]
    kinds = {canonical_kind(m) for m in menu}
    return tuple(k for k in NOISE_KINDS if k in kinds)


# --------------------------------------------------------------------------- specs


def _check_window(start, end, n):
    if not (0 <= start < end <= n):
        raise NoiseError(f"window [{start}, {end}) out of bounds for {n} samples")


@dataclass(frozen=True)
class SineWanderSpec:
    kind: ClassVar[str] = SINE
    start: int
    end: int
    amplitude: float
    frequency: float
    phase: float = 0.0

    def component(self, n: int, sample_rate: float) -> np.ndarray:
        _check_window(self.start, self.end, n)
        if self.amplitude < 0 or not self.frequency > 0:
            raise NoiseError("sine wander needs amplitude >= 0 and frequency > 0")
        out = np.zeros(n)
        k = np.arange(self.end - self.start)
        out[self.start:self.end] = self.amplitude * np.sin(
            2 * np.pi * self.frequency * k / sample_rate + self.phase)
        return out


@dataclass(frozen=True)
class WhiteNoiseSpec:
    """Uniform noise in ``[-amplitude, amplitude]`` held for ``sample_rate/frequency``
    samples per draw.  ``seed`` fixes the realization."""

    kind: ClassVar[str] = WHITE
    start: int
    end: int
    amplitude: float
    frequency: float
    seed: int = 0

    def component(self, n: int, sample_rate: float, rng=None) -> np.ndarray:
        _check_window(self.start, self.end, n)
        if self.amplitude < 0:
            raise NoiseError("white noise amplitude must be >= 0")
        if not 0 < self.frequency <= sample_rate:
            raise NoiseError(
                f"white noise hold rate {self.frequency} Hz must lie in (0, {sample_rate}]")
        rng = np.random.default_rng(self.seed) if rng is None else rng
        length = self.end - self.start
        hold_index = np.floor(np.arange(length) * self.frequency / sample_rate).astype(np.int64)
        draws = rng.uniform(-self.amplitude, self.amplitude, size=int(hold_index[-1]) + 1)
        out = np.zeros(n)
        out[self.start:self.end] = draws[hold_index]
        return out


@dataclass(frozen=True)
class LinearWanderSpec:
    kind: ClassVar[str] = LINEAR
    start: int
    end: int
    slope: float  # mV per second

    def component(self, n: int, sample_rate: float) -> np.ndarray:
        _check_window(self.start, self.end, n)
        out = np.zeros(n)
        out[self.start:self.end] = self.slope * np.arange(self.end - self.start) / sample_rate
        return out


def pulse_width(frequency: float, sample_rate: float) -> int:
    """Samples in one pulse: one sine period, rounded half up."""
    return int(math.floor(sample_rate / frequency + 0.5))


@dataclass(frozen=True)
class ShockPulseSpec:
    kind: ClassVar[str] = SHOCK
    frequency: float
    max_value: float
    pulse_starts: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pulse_starts", tuple(int(p) for p in self.pulse_starts))

    @property
    def n_pulses(self) -> int:
        return len(self.pulse_starts)

    def component(self, n: int, sample_rate: float) -> np.ndarray:
        out = np.zeros(n)
        if not self.pulse_starts:
            return out
        if not self.frequency > 0 or self.max_value < 0:
            raise NoiseError("shock pulses need frequency > 0 and max_value >= 0")
        width = pulse_width(self.frequency, sample_rate)
        starts = sorted(self.pulse_starts)
        for a, b in zip(starts, starts[1:]):
            if b < a + width:
                raise NoiseError(f"overlapping pulse windows at {a} and {b}")
        if starts[0] < 0 or starts[-1] + width > n:
            raise NoiseError("shock pulse extends past the segment")
        shape = self.max_value * np.sin(2 * np.pi * self.frequency * np.arange(width) / sample_rate)
        for p in starts:
            out[p:p + width] = shape
        return out


SPEC_TYPES = {cls.kind: cls for cls in (SineWanderSpec, WhiteNoiseSpec, LinearWanderSpec,
                                        ShockPulseSpec)}


def spec_to_dict(spec) -> dict:
    d = {"kind": spec.kind}
    d.update(asdict(spec))
    if "pulse_starts" in d:
        d["pulse_starts"] = list(d["pulse_starts"])
    return d


def spec_from_dict(d: dict):
    d = dict(d)
    cls = SPEC_TYPES[canonical_kind(d.pop("kind"))]
    return cls(**d)


def _spec_key(lead: str, spec) -> str:
    return json.dumps([lead, spec_to_dict(spec)], sort_keys=True)


# --------------------------------------------------------------------------- transforms


def _add(segment: EcgSegment, lead: str, component: np.ndarray) -> EcgSegment:
    return segment.with_lead(lead, segment.lead(lead) + component)


def apply_sine_wander(segment: EcgSegment, lead: str, spec: SineWanderSpec) -> EcgSegment:
    return _add(segment, lead, spec.component(segment.n_samples, segment.sample_rate))


def apply_linear_wander(segment: EcgSegment, lead: str, spec: LinearWanderSpec) -> EcgSegment:
    return _add(segment, lead, spec.component(segment.n_samples, segment.sample_rate))


def apply_white_noise(segment: EcgSegment, lead: str, spec: WhiteNoiseSpec, rng=None):
    """Returns ``(noisy_segment, realization)``; the realization is the added
    noise over the window ``[start, end)``."""
    comp = spec.component(segment.n_samples, segment.sample_rate, rng)
    return _add(segment, lead, comp), comp[spec.start:spec.end].copy()


def apply_shock_pulses(segment: EcgSegment, lead: str, spec: ShockPulseSpec) -> EcgSegment:
    return _add(segment, lead, spec.component(segment.n_samples, segment.sample_rate))


# --------------------------------------------------------------------------- plans


@dataclass(frozen=True)
class NoiseRanges:
    """Sampling ranges for each family; each pair is ``(low, high)``."""

    sine_amplitude: tuple[float, float] = (0.05, 0.5)
    sine_frequency: tuple[float, float] = (0.15, 0.8)
    sine_phase: tuple[float, float] = (0.0, 2 * math.pi)
    sine_coverage: float = 0.6
    white_amplitude: tuple[float, float] = (0.02, 0.2)
    white_frequency: tuple[float, float] = (25.0, 250.0)
    white_coverage: float = 0.2
    linear_slope: tuple[float, float] = (0.02, 0.3)  # magnitude; sign is random
    linear_coverage: float = 0.6
    shock_count: tuple[int, int] = (1, 5)
    shock_frequency: tuple[float, float] = (2.0, 10.0)
    shock_max: tuple[float, float] = (0.5, 3.0)

    def __post_init__(self):
        for name, value in asdict(self).items():
            if isinstance(value, (tuple, list)):
                lo, hi = value
                if lo > hi:
                    raise NoiseError(f"empty range for {name}: {value}")
                object.__setattr__(self, name, (lo, hi))
            elif not 0 < value <= 1:
                raise NoiseError(f"{name} must lie in (0, 1]")

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d: dict | None) -> "NoiseRanges":
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in (d or {}).items()})


@dataclass(frozen=True)
class NoisePlan:
    """Everything needed to reproduce one noising: ``entries`` are
    ``(lead, spec)`` pairs, ``leads`` the affected subset."""

    entries: tuple = ()
    leads: tuple[str, ...] = ()
    seed: int | None = None

    @property
    def is_empty(self) -> bool:
        return not self.entries

    def specs_for(self, lead: str) -> list:
        return [spec for name, spec in self.entries if name == lead]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "leads": list(self.leads),
            "specs": [dict(lead=lead, **spec_to_dict(spec)) for lead, spec in self.entries],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NoisePlan":
        entries = []
        for item in d.get("specs", []):
            item = dict(item)
            lead = item.pop("lead")
            entries.append((lead, spec_from_dict(item)))
        return cls(tuple(entries), tuple(d.get("leads", [])), d.get("seed"))


def _window(rng, n: int, coverage: float) -> tuple[int, int]:
    min_len = min(n, int(math.ceil(coverage * n)))
    length = int(rng.integers(min_len, n + 1))
    start = int(rng.integers(0, n - length + 1))
    return start, start + length


def _uniform(rng, bounds) -> float:
    lo, hi = bounds
    return float(rng.uniform(lo, hi)) if hi > lo else float(lo)


def _nonempty_subset(rng, items: Sequence) -> list:
    k = int(rng.integers(1, len(items) + 1))
    chosen = set(rng.choice(len(items), size=k, replace=False).tolist())
    return [item for i, item in enumerate(items) if i in chosen]


def _sample_spec(kind: str, rng, n: int, sample_rate: float, r: NoiseRanges):
    if kind == SINE:
        start, end = _window(rng, n, r.sine_coverage)
        return SineWanderSpec(start, end, _uniform(rng, r.sine_amplitude),
                              _uniform(rng, r.sine_frequency), _uniform(rng, r.sine_phase))
    if kind == WHITE:
        start, end = _window(rng, n, r.white_coverage)
        lo, hi = r.white_frequency
        freq = _uniform(rng, (min(lo, sample_rate), min(hi, sample_rate)))
        return WhiteNoiseSpec(start, end, _uniform(rng, r.white_amplitude), freq,
                              int(rng.integers(0, 2**63 - 1)))
    if kind == LINEAR:
        start, end = _window(rng, n, r.linear_coverage)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        return LinearWanderSpec(start, end, sign * _uniform(rng, r.linear_slope))
    if kind == SHOCK:
        count = int(rng.integers(r.shock_count[0], r.shock_count[1] + 1))
        freq = _uniform(rng, r.shock_frequency)
        peak = _uniform(rng, r.shock_max)
        width = pulse_width(freq, sample_rate)
        count = min(count, n // width)
        free = n - count * width
        # sorted offsets in [0, free] spread into non-overlapping starts
        offsets = np.sort(rng.integers(0, free + 1, size=count))
        starts = tuple(int(o) + i * width for i, o in enumerate(offsets))
        return ShockPulseSpec(freq, peak, starts)
    raise NoiseError(f"unknown noise kind {kind!r}")


def sample_noise_plan(rng: np.random.Generator, leads: Sequence[str], n_samples: int,
                      menu: Iterable[str], ranges: NoiseRanges | None = None, *,
                      sample_rate: float = 500.0, require_noise: bool = False,
                      required_leads: Iterable[str] = (), seed: int | None = None) -> NoisePlan:
    """Draw a random plan: a non-empty lead subset, then for every chosen lead a
    non-empty subset of ``menu`` with parameters uniform over ``ranges``.

    Leads in ``required_leads`` are always part of the subset.  An empty menu
    gives an empty plan unless ``require_noise`` is set.
    """
    menu = parse_menu(menu)
    ranges = ranges or NoiseRanges()
    if not menu:
        if require_noise:
            raise NoiseError("noise required but the menu is empty")
        return NoisePlan(seed=seed)
    leads = list(leads)
    required = set(required_leads)
    if not required <= set(leads):
        raise NoiseError(f"required leads {sorted(required - set(leads))} not in segment")
    chosen = set(_nonempty_subset(rng, leads)) | required
    chosen_leads = tuple(name for name in leads if name in chosen)
    entries = []
    for lead in chosen_leads:
        for kind in _nonempty_subset(rng, menu):
            entries.append((lead, _sample_spec(kind, rng, n_samples, sample_rate, ranges)))
    return NoisePlan(tuple(entries), chosen_leads, seed)


def noise_components(segment: EcgSegment, plan: NoisePlan) -> np.ndarray:
    """Total additive noise per lead, shape like ``segment.data``.

    Components are summed in a canonical order so the result does not depend
    on the order of ``plan.entries``.
    """
    total = np.zeros_like(segment.data)
    for lead, spec in sorted(plan.entries, key=lambda e: _spec_key(*e)):
        total[segment.lead_index(lead)] += spec.component(segment.n_samples, segment.sample_rate)
    return total


def apply_noise_plan(segment: EcgSegment, plan: NoisePlan) -> EcgSegment:
    if plan.is_empty:
        return segment
    return segment.with_data(segment.data + noise_components(segment, plan))


# --------------------------------------------------------------------------- datasets


@dataclass(frozen=True)
class NoiseConfig:
    menu: tuple[str, ...] = NOISE_KINDS
    ranges: NoiseRanges = field(default_factory=NoiseRanges)
    require_noise: bool = True
    required_leads: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "menu", parse_menu(self.menu))
        object.__setattr__(self, "required_leads", tuple(self.required_leads))

    def to_dict(self) -> dict:
        return {"menu": list(self.menu), "ranges": self.ranges.to_dict(),
                "require_noise": self.require_noise, "required_leads": list(self.required_leads)}

    @classmethod
    def from_dict(cls, d: dict | None) -> "NoiseConfig":
        d = dict(d or {})
        if "ranges" in d:
            d["ranges"] = NoiseRanges.from_dict(d["ranges"])
        return cls(**d)


@dataclass(frozen=True, eq=False)
class DatasetPair:
    input: EcgSegment
    target: EcgSegment
    kind: str
    plan: NoisePlan
    source_id: str
    seed: int | None = None

    @property
    def pair_id(self) -> str:
        return self.source_id


def pair_seed(master_seed: int, split: str, segment_id: str, epoch: int | None = None) -> int:
    if epoch is None:
        return derive_seed(master_seed, split, segment_id)
    return derive_seed(master_seed, split, segment_id, f"epoch{epoch}")


def n_clean_clean(fraction: float, m: int) -> int:
    return int(math.floor(fraction * m + 0.5))


def build_dataset(segments: Sequence[EcgSegment], clean_clean_fraction: float, split: str,
                  master_seed: int, noise_config: NoiseConfig | None = None,
                  epoch: int | None = None) -> list[DatasetPair]:
    """Turn clean segments into training pairs.

    ``round(fraction * M)`` randomly chosen segments become clean-clean pairs and
    the rest noisy-clean pairs, so no segment id appears in both.  Noise for a
    segment is drawn from a seed hashed from ``(master_seed, split, segment_id)``
    (plus ``epoch`` if given, for fresh training noise), which makes the output
    independent of processing order.
    """
    if not 0 <= clean_clean_fraction <= 1:
        raise NoiseError("clean_clean_fraction must lie in [0, 1]")
    if split not in SPLITS:
        raise NoiseError(f"split must be one of {SPLITS}")
    noise_config = noise_config or NoiseConfig()
    ids = [s.segment_id for s in segments]
    if len(set(ids)) != len(ids):
        raise NoiseError("duplicate segment_ids in input")
    m = len(segments)
    k = n_clean_clean(clean_clean_fraction, m)
    order = np.random.default_rng(derive_seed(master_seed, split, "clean-clean")).permutation(m)
    clean_set = set(order[:k].tolist())
    pairs = []
    for i, seg in enumerate(segments):
        if i in clean_set:
            pairs.append(DatasetPair(seg, seg, CLEAN_CLEAN, NoisePlan(), seg.segment_id))
            continue
        seed = pair_seed(master_seed, split, seg.segment_id, epoch)
        plan = sample_noise_plan(
            np.random.default_rng(seed), seg.leads, seg.n_samples, noise_config.menu,
            noise_config.ranges, sample_rate=seg.sample_rate,
            require_noise=noise_config.require_noise,
            required_leads=noise_config.required_leads, seed=seed)
        pairs.append(DatasetPair(apply_noise_plan(seg, plan), seg, NOISY_CLEAN, plan,
                                 seg.segment_id, seed))
    return pairs


def save_dataset(pairs: Sequence[DatasetPair], directory, split: str = "",
                 master_seed: int | None = None) -> Path:
    """Write each pair (input CSV, target CSV, plan JSON) and a manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    records = []
    for pair in pairs:
        pid = pair.pair_id
        save_segment(pair.input, directory / f"{pid}_input.csv")
        save_segment(pair.target, directory / f"{pid}_target.csv")
        plan_file = directory / f"{pid}_plan.json"
        plan_file.write_text(json.dumps(pair.plan.to_dict(), indent=1, sort_keys=True) + "\n")
        records.append({"id": pid, "kind": pair.kind, "seed": pair.seed,
                        "input": f"{pid}_input.csv", "target": f"{pid}_target.csv",
                        "plan": plan_file.name})
    manifest = {"split": split, "master_seed": master_seed, "pairs": records}
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return path


def load_dataset(directory) -> list[DatasetPair]:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    pairs = []
    for rec in manifest["pairs"]:
        plan = NoisePlan.from_dict(json.loads((directory / rec["plan"]).read_text()))
        pairs.append(DatasetPair(load_segment(directory / rec["input"]),
                                 load_segment(directory / rec["target"]),
                                 rec["kind"], plan, rec["id"], rec.get("seed")))
    return pairs
