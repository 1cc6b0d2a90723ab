"""Figure rendering for the report paths.

Every report-producing command also drops a PNG next to its delimited
output (disable with --no-figures). Rendering is headless (Agg) and uses
fixed sizes so figures regenerate identically for identical inputs.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .cer_engine import CerRecord  # noqa: E402
from .cleaning import CleaningReport  # noqa: E402
from .evaluation import EvalReport  # noqa: E402
from .manifest import TOTAL_ROW_ID, SpeakerStats  # noqa: E402
from .sampler import TrajectoryPoint  # noqa: E402


def _save(fig, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def speaker_stats_figure(stats: list[SpeakerStats], path: str | Path) -> None:
    """Bar chart of per-speaker file counts and hours (totals row excluded)."""
    rows = [s for s in stats if s.speaker_id != TOTAL_ROW_ID]
    speakers = [s.speaker_id for s in rows]
    fig, (ax_files, ax_hours) = plt.subplots(1, 2, figsize=(10, 4))
    ax_files.barh(speakers, [s.file_count for s in rows], color="tab:blue")
    ax_files.set_xlabel("files")
    ax_hours.barh(speakers, [s.hours for s in rows], color="tab:orange")
    ax_hours.set_xlabel("hours")
    for ax in (ax_files, ax_hours):
        ax.invert_yaxis()
    fig.suptitle("corpus size per speaker")
    _save(fig, path)


def cleaning_report_figure(report: CleaningReport, path: str | Path) -> None:
    """Grouped bars of the four cleaning counts per speaker."""
    speakers = sorted(report.per_speaker)
    fig, ax = plt.subplots(figsize=(max(6, 1.2 * len(speakers) + 2), 4))
    kinds = ("empty_removed", "duplicates_removed", "newlines_stripped", "separators_fixed")
    width = 0.2
    for i, kind in enumerate(kinds):
        xs = [x + (i - 1.5) * width for x in range(len(speakers))]
        ys = [getattr(report.per_speaker[s], kind) for s in speakers]
        ax.bar(xs, ys, width=width, label=kind)
    ax.set_xticks(range(len(speakers)))
    ax.set_xticklabels(speakers, rotation=30, ha="right")
    ax.set_ylabel("count")
    ax.legend(fontsize=8)
    ax.set_title("cleaning pass counts per speaker")
    _save(fig, path)


def cer_histogram_figure(records: Iterable[CerRecord], path: str | Path) -> None:
    values = [r.cer for r in records]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(values, bins=40, color="tab:green")
    ax.set_xlabel("character error rate")
    ax.set_ylabel("utterances")
    ax.set_title("CER distribution")
    _save(fig, path)


def eval_report_figure(report: EvalReport, path: str | Path) -> None:
    """Per-speaker mean CER and cosine similarity side by side."""
    speakers = sorted(report.per_speaker)
    fig, (ax_cer, ax_cos) = plt.subplots(1, 2, figsize=(10, 4))
    cers = [report.per_speaker[s].mean_cer for s in speakers]
    coss = [report.per_speaker[s].mean_cosine for s in speakers]
    if any(v is not None for v in cers):
        ax_cer.bar(speakers, [v if v is not None else 0.0 for v in cers], color="tab:red")
    ax_cer.set_ylabel("mean CER (lower is better)")
    if any(v is not None for v in coss):
        ax_cos.bar(speakers, [v if v is not None else 0.0 for v in coss], color="tab:purple")
        ax_cos.set_ylim(-1.0, 1.0)
    ax_cos.set_ylabel("mean cosine sim (higher is better)")
    for ax in (ax_cer, ax_cos):
        ax.tick_params(axis="x", rotation=30)
    fig.suptitle("evaluation per speaker")
    _save(fig, path)


def trajectory_figure(points: list[TrajectoryPoint], path: str | Path) -> None:
    """State components against integration time."""
    ts = [p.t for p in points]
    dim = len(points[0].state) if points else 0
    fig, ax = plt.subplots(figsize=(6, 4))
    for d in range(dim):
        ax.plot(ts, [p.state[d] for p in points], marker="o", markersize=3,
                label=f"x[{d}]")
    ax.set_xlabel("t")
    ax.set_ylabel("state")
    if 0 < dim <= 8:
        ax.legend(fontsize=8)
    ax.set_title("Euler sampling trajectory")
    _save(fig, path)
