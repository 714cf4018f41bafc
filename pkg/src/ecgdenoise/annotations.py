"""Wave annotation record shared by the generator, the delineator and the scorer."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

WAVE_TYPES = ("P", "QRS", "T")


@dataclass(frozen=True)
class WaveAnnotation:
    """One delineated wave; ``[onset, offset)`` is half-open in sample indices."""

    wave_type: str
    peak: int
    onset: int
    offset: int
    normal: bool = True

    def __post_init__(self):
        if self.wave_type not in WAVE_TYPES:
            raise ValueError(f"wave_type must be one of {WAVE_TYPES}, got {self.wave_type!r}")
        for name in ("peak", "onset", "offset"):
            object.__setattr__(self, name, int(getattr(self, name)))
        object.__setattr__(self, "normal", bool(self.normal))
        if not (self.onset <= self.peak < self.offset):
            raise ValueError(
                f"need onset <= peak < offset, got {self.onset}, {self.peak}, {self.offset}"
            )

    @property
    def interval(self) -> tuple[int, int]:
        return self.onset, self.offset

    def to_dict(self) -> dict:
        return {"type": self.wave_type, "peak": self.peak, "onset": self.onset,
                "offset": self.offset, "normal": self.normal}

    @classmethod
    def from_dict(cls, d: dict) -> "WaveAnnotation":
        return cls(d["type"], d["peak"], d["onset"], d["offset"], d.get("normal", True))


def save_annotations(annotations, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps([a.to_dict() for a in annotations], indent=1) + "\n")


def load_annotation_file(path) -> list[WaveAnnotation]:
    return [WaveAnnotation.from_dict(d) for d in json.loads(Path(path).read_text())]


def sort_annotations(annotations):
    return sorted(annotations, key=lambda a: (a.peak, WAVE_TYPES.index(a.wave_type)))
