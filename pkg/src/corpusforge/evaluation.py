"""Evaluation reports: corpus-level CER aggregation and speaker-embedding
cosine similarity.

Embedding extraction happens outside this toolkit; vectors arrive as JSONL
({"id", "dim", "vec"}) so fixtures stay human-auditable. Any vocoder
conditioning applied by the embedding producer belongs in the report's
provenance string.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .cer_engine import CerRecord
from .errors import (
    DimensionMismatchError,
    IoFailureError,
    MalformedLineError,
    MissingTruthError,
    ZeroNormError,
)

log = logging.getLogger(__name__)

SIMILARITY_NOTE = "higher cosine similarity means better speaker identity retention"
AGGREGATES = ("mean", "max")


@dataclass(frozen=True)
class EmbeddingVector:
    id: str
    dim: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or len(vals) != self.dim:
            raise DimensionMismatchError(
                f"embedding {self.id!r}: declared dim {self.dim}, got {vals.shape}")
        if not np.isfinite(vals).all():
            raise ValueError(f"embedding {self.id!r} has non-finite values")


@dataclass(frozen=True)
class SpeakerEval:
    mean_cer: float | None
    mean_cosine: float | None
    n_items: int


@dataclass(frozen=True)
class EvalReport:
    per_speaker: dict[str, SpeakerEval] = field(default_factory=dict)
    overall: SpeakerEval = SpeakerEval(None, None, 0)
    note: str = SIMILARITY_NOTE
    provenance: str = ""

    def to_json(self) -> str:
        def entry(e: SpeakerEval) -> dict:
            return {"mean_cer": e.mean_cer, "mean_cosine": e.mean_cosine,
                    "n_items": e.n_items}

        payload = {
            "per_speaker": {s: entry(self.per_speaker[s])
                            for s in sorted(self.per_speaker)},
            "overall": entry(self.overall),
            "note": self.note,
            "provenance": self.provenance,
        }
        return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"

    def render_table(self) -> str:
        def fmt(x: float | None) -> str:
            return "-" if x is None else f"{x:.4f}"

        rows = [("speaker", "items", "CER", "CosineSim")]
        for s in sorted(self.per_speaker):
            e = self.per_speaker[s]
            rows.append((s, str(e.n_items), fmt(e.mean_cer), fmt(e.mean_cosine)))
        o = self.overall
        rows.append(("OVERALL", str(o.n_items), fmt(o.mean_cer), fmt(o.mean_cosine)))
        widths = [max(len(r[c]) for r in rows) for c in range(4)]
        lines = [
            "  ".join(f"{r[0]:<{widths[0]}}" if c == 0 else f"{r[c]:>{widths[c]}}"
                      for c in range(4))
            for r in rows
        ]
        lines.append(f"note: {self.note}")
        return "\n".join(lines) + "\n"


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """dot(a, b) / (|a| * |b|); raises on dimension mismatch or zero norm."""
    if a.dim != b.dim:
        raise DimensionMismatchError(f"{a.dim} vs {b.dim}")
    na = math.sqrt(float(a.values @ a.values))
    nb = math.sqrt(float(b.values @ b.values))
    if na == 0.0 or nb == 0.0:
        raise ZeroNormError(f"zero-norm embedding ({a.id!r} or {b.id!r})")
    return float(a.values @ b.values) / (na * nb)


def speaker_similarity_report(synth: Iterable[EmbeddingVector],
                              truth: Iterable[EmbeddingVector],
                              speaker_of: Mapping[str, str],
                              truth_speaker_of: Mapping[str, str] | None = None,
                              aggregate: str = "mean") -> EvalReport:
    """Score each synthesized embedding against its speaker's ground-truth set.

    Per item: the aggregate (mean or max) cosine against all truth
    embeddings of the item's speaker. Per speaker: the mean over items.
    Raises MissingTruthError when a synth item's speaker has no truth
    embeddings.
    """
    if aggregate not in AGGREGATES:
        raise ValueError(f"aggregate must be one of {AGGREGATES}")
    truth_speaker_of = truth_speaker_of if truth_speaker_of is not None else speaker_of

    truth_by_speaker: dict[str, list[EmbeddingVector]] = {}
    for vec in truth:
        spk = truth_speaker_of.get(vec.id)
        if spk is None:
            raise KeyError(f"truth embedding {vec.id!r} has no speaker mapping")
        truth_by_speaker.setdefault(spk, []).append(vec)

    scores: dict[str, list[float]] = {}
    for vec in sorted(synth, key=lambda v: v.id):
        spk = speaker_of.get(vec.id)
        if spk is None:
            raise KeyError(f"synth embedding {vec.id!r} has no speaker mapping")
        truths = truth_by_speaker.get(spk)
        if not truths:
            raise MissingTruthError(spk)
        sims = [cosine_similarity(vec, t) for t in truths]
        item = sum(sims) / len(sims) if aggregate == "mean" else max(sims)
        scores.setdefault(spk, []).append(item)

    per_speaker = {
        spk: SpeakerEval(None, sum(vals) / len(vals), len(vals))
        for spk, vals in scores.items()
    }
    total_n = sum(e.n_items for e in per_speaker.values())
    overall_cos = (
        sum(e.mean_cosine * e.n_items for e in per_speaker.values()) / total_n
        if total_n else None)
    return EvalReport(per_speaker, SpeakerEval(None, overall_cos, total_n))


def cer_report(records: Iterable[CerRecord], speaker_of: Mapping[str, str]) -> EvalReport:
    """Per-speaker mean CER with counts; overall is item-weighted."""
    per: dict[str, list[float]] = {}
    for rec in sorted(records, key=lambda r: r.id):
        spk = speaker_of.get(rec.id)
        if spk is None:
            raise KeyError(f"CER record {rec.id!r} has no speaker mapping")
        per.setdefault(spk, []).append(rec.cer)

    per_speaker = {
        spk: SpeakerEval(sum(vals) / len(vals), None, len(vals))
        for spk, vals in per.items()
    }
    total_n = sum(e.n_items for e in per_speaker.values())
    overall_cer = (
        sum(e.mean_cer * e.n_items for e in per_speaker.values()) / total_n
        if total_n else None)
    return EvalReport(per_speaker, SpeakerEval(overall_cer, None, total_n))


def merge_reports(cer_part: EvalReport, cosine_part: EvalReport,
                  provenance: str = "") -> EvalReport:
    """Join a CER fragment and a cosine fragment into one report.

    Each metric keeps its own item weighting (fragment overalls are already
    item-weighted); n_items reports the larger count when they differ.
    """
    speakers = set(cer_part.per_speaker) | set(cosine_part.per_speaker)
    merged: dict[str, SpeakerEval] = {}
    for spk in speakers:
        c = cer_part.per_speaker.get(spk)
        s = cosine_part.per_speaker.get(spk)
        if c and s and c.n_items != s.n_items:
            log.warning("speaker %s: %d CER items vs %d cosine items",
                        spk, c.n_items, s.n_items)
        merged[spk] = SpeakerEval(
            c.mean_cer if c else None,
            s.mean_cosine if s else None,
            max(c.n_items if c else 0, s.n_items if s else 0),
        )
    overall = SpeakerEval(
        cer_part.overall.mean_cer,
        cosine_part.overall.mean_cosine,
        max(cer_part.overall.n_items, cosine_part.overall.n_items),
    )
    return EvalReport(merged, overall, provenance=provenance)


def load_embeddings_jsonl(path: str | Path) -> list[EmbeddingVector]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailureError(f"cannot read embeddings {path}: {exc}") from exc
    vectors = []
    for line_no, line in enumerate(text.split("\n"), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            vectors.append(EmbeddingVector(str(obj["id"]), int(obj["dim"]),
                                           np.asarray(obj["vec"], dtype=np.float64)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise MalformedLineError(line_no, str(exc), str(path)) from exc
    return vectors
