"""Summary tables (CSV and aligned text) and annotated SVG plots."""
from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .metrics import MetricSummary, summarize_stats
from .segment import EcgSegment

COLUMNS = ("Mean", "Std Dev", "Min", "25%", "50%", "75%", "Max")
LABEL_COLUMN = "Denoiser"
WAVE_COLORS = {"P": "red", "QRS": "green", "T": "blue"}


def _groups(values_by_denoiser) -> list[tuple[str, list[float]]]:
    items = values_by_denoiser.items() if isinstance(values_by_denoiser, Mapping) \
        else values_by_denoiser
    return [(str(name), list(vals)) for name, vals in items]


def summarize_groups(values_by_denoiser) -> list[tuple[str, MetricSummary]]:
    """Summaries in input order; groups with no values are skipped."""
    groups = _groups(values_by_denoiser)
    rows = [(name, summarize_stats(vals)) for name, vals in groups if len(vals)]
    if not rows:
        raise ValueError("no metric values to report")
    return rows


def format_csv(rows: Sequence[tuple[str, MetricSummary]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow((LABEL_COLUMN,) + COLUMNS)
    for name, s in rows:
        writer.writerow([name] + [repr(v) for v in s.as_tuple()])
    return buf.getvalue()


def format_text(rows: Sequence[tuple[str, MetricSummary]], precision: int = 3) -> str:
    table = [(LABEL_COLUMN,) + COLUMNS]
    table += [(name,) + tuple(f"{v:.{precision}f}" for v in s.as_tuple()) for name, s in rows]
    widths = [max(len(r[i]) for r in table) for i in range(len(table[0]))]
    lines = []
    for j, r in enumerate(table):
        cells = [r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
        if j == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def read_report_csv(path) -> list[tuple[str, MetricSummary]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != (LABEL_COLUMN,) + COLUMNS:
            raise ValueError(f"unexpected report header {header!r}")
        return [(r[0], MetricSummary(*(float(v) for v in r[1:]))) for r in reader if r]


def run_report(values_by_denoiser, out_stem) -> list[tuple[str, MetricSummary]]:
    """Write ``<out_stem>.csv`` and ``<out_stem>.txt`` with one row per denoiser.

    ``values_by_denoiser`` maps denoiser names (or is a sequence of
    ``(name, values)``) to per-segment metric values.  Rows keep input order.
    """
    rows = summarize_groups(values_by_denoiser)
    out_stem = Path(out_stem)
    out_stem.parent.mkdir(parents=True, exist_ok=True)
    out_stem.with_suffix(".csv").write_text(format_csv(rows))
    out_stem.with_suffix(".txt").write_text(format_text(rows))
    return rows


def render_plot(segment: EcgSegment, path, annotations=None, leads: Sequence[str] | None = None,
                title: str | None = None) -> Path:
    """Write an SVG with one trace per lead; annotated waves are shaded by type
    (P red, QRS green, T blue).  The x axis is the sample index."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    leads = list(leads or segment.leads)
    annotations = list(annotations or [])
    n = segment.n_samples
    for a in annotations:
        if a.onset < 0 or a.offset > n or not 0 <= a.peak < n:
            raise ValueError(f"annotation {a} outside segment of {n} samples")
    x = np.arange(n)
    with matplotlib.rc_context({"svg.hashsalt": "ecgdenoise", "svg.fonttype": "none"}):
        fig, axes = plt.subplots(len(leads), 1, figsize=(max(8.0, n / 500 * 1.6), 2.2 * len(leads)),
                                 sharex=True, squeeze=False)
        for ax, lead in zip(axes[:, 0], leads):
            for a in annotations:
                ax.axvspan(a.onset, a.offset - 1, color=WAVE_COLORS[a.wave_type], alpha=0.25,
                           linewidth=0)
            ax.plot(x, segment.lead(lead), color="black", linewidth=0.7)
            ax.set_ylabel(f"{lead} (mV)")
            ax.set_xlim(0, n - 1)
        axes[-1, 0].set_xlabel("sample index")
        if title:
            axes[0, 0].set_title(title)
        fig.tight_layout()
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
