"""Corpus data model: utterances, JSONL manifests, statistics, train/val splits.

A manifest is a JSON-lines file with one utterance record per line, kept in
canonical ascending-id order so that every downstream stage is
byte-deterministic. An optional first line holding a ``__meta__`` object
carries the split tag and provenance; hand-written files without it load
with ``split="all"``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable

from .errors import DuplicateIdError, IoFailureError, MalformedLineError, MissingFieldError

UTTERANCE_FIELDS = (
    "id",
    "speaker_id",
    "language",
    "audio_path",
    "transcript",
    "duration_s",
    "sample_rate",
)

SPLITS = ("all", "train", "val")

TOTAL_ROW_ID = "TOTAL"


@dataclass(frozen=True)
class Utterance:
    """One corpus item. Immutable; safe to share between workers."""

    id: str
    speaker_id: str
    language: str
    audio_path: str
    transcript: str
    duration_s: float
    sample_rate: int

    def __post_init__(self):
        if not self.id:
            raise ValueError("utterance id must be non-empty")
        if not self.speaker_id:
            raise ValueError(f"utterance {self.id!r}: speaker_id must be non-empty")
        if self.duration_s < 0:
            raise ValueError(f"utterance {self.id!r}: duration_s must be >= 0")
        if self.sample_rate <= 0:
            raise ValueError(f"utterance {self.id!r}: sample_rate must be > 0")

    def to_record(self) -> dict:
        return {name: getattr(self, name) for name in UTTERANCE_FIELDS}


@dataclass(frozen=True)
class Manifest:
    """Ordered collection of utterances plus split tag and provenance."""

    utterances: tuple[Utterance, ...]
    split: str = "all"
    created_from: str = ""

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ValueError(f"split must be one of {SPLITS}, got {self.split!r}")
        utts = tuple(self.utterances)
        object.__setattr__(self, "utterances", utts)
        for prev, cur in zip(utts, utts[1:]):
            if cur.id == prev.id:
                raise DuplicateIdError(cur.id)
            if cur.id < prev.id:
                raise ValueError(
                    f"utterances out of canonical order: {cur.id!r} after {prev.id!r}")

    @classmethod
    def from_utterances(cls, utterances: Iterable[Utterance], split: str = "all",
                        created_from: str = "") -> "Manifest":
        """Build a manifest in canonical id order, rejecting duplicate ids."""
        utts = sorted(utterances, key=lambda u: u.id)
        return cls(utterances=tuple(utts), split=split, created_from=created_from)

    def __len__(self) -> int:
        return len(self.utterances)

    def __iter__(self):
        return iter(self.utterances)

    def ids(self) -> list[str]:
        return [u.id for u in self.utterances]

    def by_speaker(self) -> dict[str, list[Utterance]]:
        groups: dict[str, list[Utterance]] = {}
        for u in self.utterances:
            groups.setdefault(u.speaker_id, []).append(u)
        return groups

    def speaker_of(self) -> dict[str, str]:
        return {u.id: u.speaker_id for u in self.utterances}

    def subset(self, keep_ids: set[str], created_from: str = "") -> "Manifest":
        kept = tuple(u for u in self.utterances if u.id in keep_ids)
        return Manifest(kept, split=self.split,
                        created_from=created_from or self.created_from)

    def with_split(self, split: str) -> "Manifest":
        return replace(self, split=split)


@dataclass(frozen=True)
class SpeakerStats:
    speaker_id: str
    file_count: int
    hours: float  # full precision; rounding happens at report rendering


@dataclass(frozen=True)
class SplitConfig:
    val_fraction: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("val_fraction must be in (0, 1)")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")


def _parse_record(obj: dict, line_no: int, path: str) -> Utterance:
    for name in UTTERANCE_FIELDS:
        if name not in obj:
            raise MissingFieldError(name, line_no, path)
    try:
        return Utterance(
            id=str(obj["id"]),
            speaker_id=str(obj["speaker_id"]),
            language=str(obj["language"]),
            audio_path=str(obj["audio_path"]),
            transcript=str(obj["transcript"]),
            duration_s=float(obj["duration_s"]),
            sample_rate=int(obj["sample_rate"]),
        )
    except (TypeError, ValueError) as exc:
        raise MalformedLineError(line_no, str(exc), path) from exc


def load_manifest(path: str | Path) -> Manifest:
    """Load a JSONL manifest, returning utterances in canonical id order.

    File order does not matter. Raises MissingFieldError, DuplicateIdError,
    or MalformedLineError with the offending line number.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailureError(f"cannot read manifest {path}: {exc}") from exc

    split = "all"
    created_from = str(path)
    utterances: list[Utterance] = []
    ids: set[str] = set()
    # split on \n only: splitlines() would also cut at NEL/LS/PS, which are
    # legal raw characters inside JSON strings
    for line_no, line in enumerate(text.split("\n"), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedLineError(line_no, f"invalid JSON: {exc.msg}", str(path)) from exc
        if not isinstance(obj, dict):
            raise MalformedLineError(line_no, "record is not a JSON object", str(path))
        if line_no == 1 and "__meta__" in obj:
            meta = obj["__meta__"]
            split = meta.get("split", "all")
            created_from = meta.get("created_from", str(path))
            continue
        utt = _parse_record(obj, line_no, str(path))
        if utt.id in ids:
            raise DuplicateIdError(utt.id, line_no)
        ids.add(utt.id)
        utterances.append(utt)

    utterances.sort(key=lambda u: u.id)
    return Manifest(tuple(utterances), split=split, created_from=created_from)


def save_manifest(m: Manifest, path: str | Path) -> None:
    """Write JSONL in canonical id order; byte-deterministic for equal inputs."""
    path = Path(path)
    lines = [json.dumps({"__meta__": {"split": m.split, "created_from": m.created_from}},
                        ensure_ascii=False)]
    for u in m.utterances:
        lines.append(json.dumps(u.to_record(), ensure_ascii=False))
    data = "\n".join(lines) + "\n"
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(data, encoding="utf-8")
    except OSError as exc:
        raise IoFailureError(f"cannot write manifest {path}: {exc}") from exc


def compute_stats(m: Manifest) -> list[SpeakerStats]:
    """Per-speaker file counts and hours, sorted by speaker, plus a totals row.

    Empty manifests yield just the zero totals row. Hours are accumulated at
    full precision; the totals row sums the per-speaker entries exactly.
    """
    groups = m.by_speaker()
    stats = []
    for speaker_id in sorted(groups):
        utts = groups[speaker_id]
        hours = sum(u.duration_s for u in utts) / 3600.0
        stats.append(SpeakerStats(speaker_id, len(utts), hours))
    total = SpeakerStats(
        TOTAL_ROW_ID,
        sum(s.file_count for s in stats),
        sum(s.hours for s in stats),
    )
    stats.append(total)
    return stats


def render_stats_table(stats: list[SpeakerStats]) -> str:
    """Aligned-column text report: speaker, files, hours (2 decimals)."""
    rows = [("speaker", "files", "hours")]
    for s in stats:
        rows.append((s.speaker_id, str(s.file_count), f"{s.hours:.2f}"))
    widths = [max(len(r[c]) for r in rows) for c in range(3)]
    out = []
    for r in rows:
        out.append(f"{r[0]:<{widths[0]}}  {r[1]:>{widths[1]}}  {r[2]:>{widths[2]}}")
    return "\n".join(out) + "\n"


def stats_to_jsonl(stats: list[SpeakerStats]) -> str:
    lines = []
    for s in stats:
        lines.append(json.dumps(
            {"speaker_id": s.speaker_id, "file_count": s.file_count,
             "hours": round(s.hours, 2)},
            ensure_ascii=False))
    return "\n".join(lines) + "\n"


def _selection_value(seed: int, utt_id: str) -> int:
    # Stable across processes; builtin hash() is salted per run.
    digest = hashlib.sha256(f"{seed}:{utt_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def val_count(n_files: int, val_fraction: float) -> int:
    """Validation size for one speaker: ceil(fraction * n), capped so train
    keeps at least one file; singleton speakers stay entirely in train."""
    if n_files < 2:
        return 0
    return min(math.ceil(val_fraction * n_files), n_files - 1)


def split_train_val(m: Manifest, cfg: SplitConfig) -> tuple[Manifest, Manifest]:
    """Disjoint, exhaustive per-speaker split, deterministic for a fixed seed.

    Selection ranks each utterance by a hash of (seed, id), so input ordering
    never matters and different seeds produce different (equal-sized) picks.
    """
    val_ids: set[str] = set()
    for speaker_id, utts in m.by_speaker().items():
        k = val_count(len(utts), cfg.val_fraction)
        if k == 0:
            continue
        ranked = sorted(utts, key=lambda u: (_selection_value(cfg.seed, u.id), u.id))
        val_ids.update(u.id for u in ranked[:k])

    train = tuple(u for u in m.utterances if u.id not in val_ids)
    val = tuple(u for u in m.utterances if u.id in val_ids)
    provenance = f"split(seed={cfg.seed}, val_fraction={cfg.val_fraction})"
    return (
        Manifest(train, split="train", created_from=provenance),
        Manifest(val, split="val", created_from=provenance),
    )
