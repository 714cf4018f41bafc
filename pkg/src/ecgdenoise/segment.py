"""Multilead ECG segment container, lead derivation and segment file I/O.

On disk a segment is a CSV file (header row of lead names, one row per sample)
plus a JSON sidecar with the same stem holding ``segment_id``, ``sample_rate``
and optionally ``annotations``.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

DEFAULT_SAMPLE_RATE = 500.0


class SegmentError(ValueError):
    """Raised when a segment violates its invariants or a file is malformed."""


@dataclass(frozen=True, eq=False)
class EcgSegment:
    """Immutable multilead waveform in millivolts.

    ``data`` has shape ``(n_leads, n_samples)``; row ``i`` is lead ``leads[i]``.
    """

    leads: tuple[str, ...]
    data: np.ndarray
    sample_rate: float = DEFAULT_SAMPLE_RATE
    segment_id: str = ""
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        leads = tuple(str(name) for name in self.leads)
        data = np.array(self.data, dtype=np.float64, copy=True)
        if data.ndim == 1 and len(leads) == 1:
            data = data[None, :]
        if data.ndim != 2:
            raise SegmentError("segment data must be 2-D (n_leads, n_samples)")
        if data.shape[0] != len(leads):
            raise SegmentError(
                f"{len(leads)} lead names for {data.shape[0]} data rows"
            )
        if len(set(leads)) != len(leads):
            raise SegmentError("duplicate lead names")
        if data.shape[1] < 1:
            raise SegmentError("segment must contain at least one sample")
        if not np.all(np.isfinite(data)):
            raise SegmentError("non-finite sample")
        if not self.sample_rate > 0:
            raise SegmentError("sample_rate must be positive")
        data.setflags(write=False)
        object.__setattr__(self, "leads", leads)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))
        object.__setattr__(self, "segment_id", str(self.segment_id))
        object.__setattr__(self, "_index", {name: i for i, name in enumerate(leads)})

    @classmethod
    def from_leads(cls, leads: dict[str, Sequence[float]], sample_rate=DEFAULT_SAMPLE_RATE,
                   segment_id=""):
        lengths = {len(v) for v in leads.values()}
        if len(lengths) > 1:
            raise SegmentError("ragged leads")
        return cls(tuple(leads), np.array([np.asarray(v, float) for v in leads.values()]),
                   sample_rate, segment_id)

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    def has_lead(self, name: str) -> bool:
        return name in self._index

    def lead(self, name: str) -> np.ndarray:
        try:
            return self.data[self._index[name]]
        except KeyError:
            raise SegmentError(f"unknown lead {name!r}; have {list(self.leads)}") from None

    def lead_index(self, name: str) -> int:
        self.lead(name)
        return self._index[name]

    def select(self, names: Iterable[str]) -> "EcgSegment":
        names = tuple(names)
        return EcgSegment(names, np.array([self.lead(n) for n in names]),
                          self.sample_rate, self.segment_id)

    def with_data(self, data: np.ndarray, segment_id: str | None = None) -> "EcgSegment":
        return EcgSegment(self.leads, data, self.sample_rate,
                          self.segment_id if segment_id is None else segment_id)

    def with_lead(self, name: str, values: np.ndarray) -> "EcgSegment":
        data = np.array(self.data)
        data[self.lead_index(name)] = values
        return self.with_data(data)

    def equals(self, other: "EcgSegment") -> bool:
        """Bit-level equality of leads, samples, rate and id."""
        return (
            self.leads == other.leads
            and self.sample_rate == other.sample_rate
            and self.segment_id == other.segment_id
            and self.data.shape == other.data.shape
            and bool(np.array_equal(self.data, other.data))
        )


def derive_leads(segment: EcgSegment) -> EcgSegment:
    """Append III, aVR, aVL and aVF computed from leads I and II.

    Uses the Einthoven and Goldberger relations; the input leads are kept as is.
    """
    if not (segment.has_lead("I") and segment.has_lead("II")):
        raise SegmentError("derive_leads needs leads 'I' and 'II'")
    lead_i = segment.lead("I")
    lead_ii = segment.lead("II")
    derived = {
        "III": lead_ii - lead_i,
        "aVR": -(lead_i + lead_ii) / 2.0,
        "aVL": lead_i - lead_ii / 2.0,
        "aVF": lead_ii - lead_i / 2.0,
    }
    names = list(segment.leads)
    rows = [row for row in segment.data]
    for name, values in derived.items():
        if name in names:
            raise SegmentError(f"lead {name!r} already present")
        names.append(name)
        rows.append(values)
    return EcgSegment(tuple(names), np.array(rows), segment.sample_rate, segment.segment_id)


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def save_segment(segment: EcgSegment, path, annotations=None, extra: dict | None = None) -> None:
    """Write ``segment`` as CSV plus a JSON sidecar.

    Samples are written with ``repr`` so that loading restores them bit for bit.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(segment.leads)
        for row in segment.data.T:
            writer.writerow([repr(float(v)) for v in row])
    meta = {"segment_id": segment.segment_id, "sample_rate": segment.sample_rate}
    if annotations is not None:
        meta["annotations"] = [a.to_dict() for a in annotations]
    if extra:
        meta.update(extra)
    sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _read_sidecar(path: Path) -> dict:
    side = sidecar_path(path)
    if not side.exists():
        return {}
    try:
        meta = json.loads(side.read_text())
    except json.JSONDecodeError as exc:
        raise SegmentError(f"malformed sidecar {side}: {exc}") from None
    if not isinstance(meta, dict):
        raise SegmentError(f"malformed sidecar {side}")
    return meta


def load_segment(path) -> EcgSegment:
    """Read a segment written by :func:`save_segment` and re-validate it."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SegmentError("malformed header: empty file") from None
        header = [h.strip() for h in header]
        if not header or any(h == "" for h in header) or len(set(header)) != len(header):
            raise SegmentError(f"malformed header: {header!r}")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header) or any(cell.strip() == "" for cell in row):
                raise SegmentError(f"ragged leads (line {line_no})")
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                raise SegmentError(f"malformed sample on line {line_no}") from None
            if not all(np.isfinite(values)):
                raise SegmentError(f"non-finite sample on line {line_no}")
            rows.append(values)
    if not rows:
        raise SegmentError("segment file has no samples")
    meta = _read_sidecar(path)
    return EcgSegment(
        tuple(header),
        np.array(rows, dtype=np.float64).T,
        meta.get("sample_rate", DEFAULT_SAMPLE_RATE),
        meta.get("segment_id", path.stem),
    )


def load_annotations(path):
    """Annotations stored in the sidecar of a segment file (empty list if none)."""
    from .annotations import WaveAnnotation

    meta = _read_sidecar(Path(path))
    return [WaveAnnotation.from_dict(d) for d in meta.get("annotations", [])]
