"""Pipeline configuration and stage orchestration.

The canonical stage order is fixed here because the source corpora
interleave cleaning, filtering, and selection without a stated order:

    scan -> clean (strip_newlines, fix_separators, dedupe, remove_empty)
         -> trim -> normalize -> cer/select (when hypotheses are given)
         -> filter -> split -> stats

Per-utterance audio work runs on a thread pool; results are merged in
canonical id order, so worker count is a throughput knob with zero effect
on output bytes.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath
from typing import Callable, Iterable, TypeVar

from . import audio as adsp
from .audio import TrimSpec
from .cleaning import SeparatorPolicy
from .errors import AllZeroError, ConfigInvalidError, FullySilentError
from .manifest import Manifest, SplitConfig, Utterance
from .prompts import PromptSpec

log = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

LOG_LEVELS = ("error", "warn", "info", "debug")


@dataclass(frozen=True)
class PipelineConfig:
    corpus_root: Path = Path(".")
    manifest: Path | None = None
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    seed: int = 0
    trim: TrimSpec = field(default_factory=TrimSpec)
    separator: SeparatorPolicy = field(default_factory=SeparatorPolicy)
    cer_top_n: int = 8000
    min_duration_s: float = 3.0
    prompt: PromptSpec = field(default_factory=PromptSpec)
    split: SplitConfig = field(default_factory=SplitConfig)
    asr_endpoint: str | None = None
    log_level: str = "info"
    target_peak: float = 0.995
    cer_norm: str = "nfc"

    def __post_init__(self):
        if self.workers < 1:
            raise ConfigInvalidError("workers", "must be a positive integer")
        if self.seed < 0:
            raise ConfigInvalidError("seed", "must be unsigned")
        if self.cer_top_n < 1:
            raise ConfigInvalidError("cer_top_n", "must be a positive integer")
        if self.min_duration_s < 0:
            raise ConfigInvalidError("min_duration_s", "must be >= 0")
        if self.log_level not in LOG_LEVELS:
            raise ConfigInvalidError("log_level", f"must be one of {LOG_LEVELS}")
        if not 0.0 < self.target_peak <= 1.0:
            raise ConfigInvalidError("target_peak", "must be in (0, 1]")


def _build_section(name: str, cls, data: dict):
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigInvalidError(name, str(exc)) from exc
    except ValueError as exc:
        raise ConfigInvalidError(name, str(exc)) from exc


def load_config(path: str | Path | None, overrides: dict | None = None) -> PipelineConfig:
    """Build a PipelineConfig: flags win over the file, the file over defaults.

    `overrides` holds only explicitly-set flag values. Nested sections
    ("trim", "separator", "prompt", "split") merge key by key. A relative
    "manifest" coming from the config file is resolved against corpus_root;
    flag paths stay relative to the working directory as usual. A top-level
    "seed" flows into the split and prompt sections unless they set their own.
    """
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigInvalidError("config", f"cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigInvalidError("config", f"invalid JSON in {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigInvalidError("config", "top level must be a JSON object")

    merged = dict(data)
    flag_keys = set()
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if isinstance(value, dict):
            section = dict(merged.get(key, {}))
            section.update({k: v for k, v in value.items() if v is not None})
            if any(v is not None for v in value.values()):
                flag_keys.add(key)
            merged[key] = section
        else:
            merged[key] = value
            flag_keys.add(key)

    if "seed" in merged:
        for section_key in ("split", "prompt"):
            section = dict(merged.get(section_key, {}))
            section.setdefault("seed", merged["seed"])
            merged[section_key] = section

    if ("manifest" in merged and "manifest" not in flag_keys
            and merged["manifest"] is not None):
        manifest_path = Path(merged["manifest"])
        if not manifest_path.is_absolute():
            merged["manifest"] = str(Path(merged.get("corpus_root", ".")) / manifest_path)

    kwargs: dict = {}
    sections = {
        "trim": TrimSpec,
        "separator": SeparatorPolicy,
        "prompt": PromptSpec,
        "split": SplitConfig,
    }
    for key, value in merged.items():
        if key in sections:
            if not isinstance(value, dict):
                raise ConfigInvalidError(key, "must be a JSON object")
            value = dict(value)
            if key == "separator" and "languages" in value:
                value["languages"] = frozenset(value["languages"])
            kwargs[key] = _build_section(key, sections[key], value)
        elif key == "corpus_root":
            kwargs[key] = Path(value)
        elif key == "manifest":
            kwargs[key] = Path(value) if value is not None else None
        elif key in ("workers", "seed", "cer_top_n"):
            try:
                kwargs[key] = int(value)
            except (TypeError, ValueError) as exc:
                raise ConfigInvalidError(key, "must be an integer") from exc
        elif key in ("min_duration_s", "target_peak"):
            try:
                kwargs[key] = float(value)
            except (TypeError, ValueError) as exc:
                raise ConfigInvalidError(key, "must be a number") from exc
        elif key in ("asr_endpoint", "log_level", "cer_norm"):
            kwargs[key] = value
        else:
            raise ConfigInvalidError(key, "unknown config field")

    try:
        return PipelineConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalidError("config", str(exc)) from exc


def run_parallel(items: Iterable[T], fn: Callable[[T], R], workers: int) -> list[R]:
    """Map fn over items on a thread pool, preserving input order."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --- corpus scanning ---

@dataclass(frozen=True)
class ScanReport:
    found: int
    skipped_no_transcript: tuple[str, ...]
    skipped_bad_audio: tuple[tuple[str, str], ...]  # (path, reason)

    def to_json(self) -> str:
        return json.dumps({
            "found": self.found,
            "skipped_no_transcript": list(self.skipped_no_transcript),
            "skipped_bad_audio": [list(x) for x in self.skipped_bad_audio],
        }, ensure_ascii=False, indent=2) + "\n"


def scan_corpus(corpus_root: str | Path) -> tuple[Manifest, ScanReport]:
    """Walk corpus_root for <language>/<speaker>/<id>.wav with a sibling
    <id>.txt transcript and build a manifest.

    The utterance id is the .wav path relative to corpus_root without the
    extension, so ids are unique and sort deterministically. speaker_id is
    "<language>_<speaker-dir>" to keep same-named voice directories in
    different languages distinct.
    """
    corpus_root = Path(corpus_root)
    utterances: list[Utterance] = []
    no_transcript: list[str] = []
    bad_audio: list[tuple[str, str]] = []
    for wav in sorted(corpus_root.glob("*/*/*.wav")):
        rel = wav.relative_to(corpus_root)
        language, speaker_dir = rel.parts[0], rel.parts[1]
        txt = wav.with_suffix(".txt")
        if not txt.exists():
            no_transcript.append(str(rel))
            continue
        try:
            duration, sample_rate = adsp.wav_duration(wav)
        except Exception as exc:
            bad_audio.append((str(rel), str(exc)))
            continue
        utterances.append(Utterance(
            id=str(PurePosixPath(rel.with_suffix(""))),
            speaker_id=f"{language}_{speaker_dir}",
            language=language,
            audio_path=str(PurePosixPath(rel)),
            transcript=txt.read_text(encoding="utf-8").rstrip("\n"),
            duration_s=duration,
            sample_rate=sample_rate,
        ))
    if no_transcript:
        log.warning("scan: %d wav files had no transcript", len(no_transcript))
    if bad_audio:
        log.warning("scan: %d wav files failed to decode", len(bad_audio))
    manifest = Manifest.from_utterances(
        utterances, created_from=f"scan({corpus_root})")
    return manifest, ScanReport(len(manifest), tuple(no_transcript), tuple(bad_audio))


# --- audio stages ---

@dataclass(frozen=True)
class AudioStageReport:
    stage: str
    processed: int
    dropped: tuple[tuple[str, str], ...]  # (utterance id, reason)
    seconds_before: float
    seconds_after: float

    def to_json(self) -> str:
        return json.dumps({
            "stage": self.stage,
            "processed": self.processed,
            "dropped": [list(x) for x in self.dropped],
            "seconds_before": self.seconds_before,
            "seconds_after": self.seconds_after,
        }, ensure_ascii=False, indent=2) + "\n"


def _stage_audio_path(stage: str, utt_id: str) -> str:
    return str(PurePosixPath("audio") / stage / f"{utt_id}.wav")


def trim_stage(m: Manifest, spec: TrimSpec, audio_root: Path, out_root: Path,
               workers: int, dry_run: bool = False,
               capture: dict | None = None) -> tuple[Manifest, AudioStageReport]:
    """Trim every clip, writing results under out_root/audio/trim/<id>.wav.

    Fully-silent clips cannot be trimmed and are dropped (with their ids in
    the report); they carry no usable speech. When `capture` is given, the
    trimmed buffers are also stored there by id so a dry run can feed the
    next stage without touching disk.
    """

    def one(u: Utterance):
        buf = adsp.decode_wav(audio_root / u.audio_path)
        try:
            result = adsp.trim_silence(buf, spec)
        except FullySilentError as exc:
            return u, None, str(exc)
        return u, result, None

    out_utts: list[Utterance] = []
    dropped: list[tuple[str, str]] = []
    before = 0.0
    after = 0.0
    for u, result, reason in run_parallel(m.utterances, one, workers):
        before += u.duration_s
        if result is None:
            dropped.append((u.id, reason))
            continue
        new_path = _stage_audio_path("trim", u.id)
        if not dry_run:
            adsp.encode_wav(result.audio, out_root / new_path)
        if capture is not None:
            capture[u.id] = result.audio
        duration = adsp.duration_seconds(result.audio)
        after += duration
        out_utts.append(Utterance(
            id=u.id, speaker_id=u.speaker_id, language=u.language,
            audio_path=new_path, transcript=u.transcript,
            duration_s=duration, sample_rate=u.sample_rate))
    report = AudioStageReport("trim", len(out_utts), tuple(dropped), before, after)
    return Manifest(tuple(out_utts), m.split, created_from="trim"), report


def normalize_stage(m: Manifest, target_peak: float, audio_root: Path, out_root: Path,
                    workers: int, dry_run: bool = False,
                    sources: dict | None = None) -> tuple[Manifest, AudioStageReport]:
    """Peak-normalize every clip into out_root/audio/normalize/<id>.wav.
    All-zero clips cannot be normalized and are dropped with a reason.
    `sources` (id -> AudioBuffer) substitutes for reading the previous
    stage's files; dry runs use it since those files were never written."""

    def one(u: Utterance):
        if sources is not None:
            buf = sources[u.id]
        else:
            buf = adsp.decode_wav(audio_root / u.audio_path)
        try:
            return u, adsp.normalize_volume(buf, target_peak), None
        except AllZeroError as exc:
            return u, None, str(exc)

    out_utts: list[Utterance] = []
    dropped: list[tuple[str, str]] = []
    total = 0.0
    for u, buf, reason in run_parallel(m.utterances, one, workers):
        if buf is None:
            dropped.append((u.id, reason))
            continue
        new_path = _stage_audio_path("normalize", u.id)
        if not dry_run:
            adsp.encode_wav(buf, out_root / new_path)
        total += u.duration_s
        out_utts.append(Utterance(
            id=u.id, speaker_id=u.speaker_id, language=u.language,
            audio_path=new_path, transcript=u.transcript,
            duration_s=u.duration_s, sample_rate=u.sample_rate))
    report = AudioStageReport("normalize", len(out_utts), tuple(dropped), total, total)
    return Manifest(tuple(out_utts), m.split, created_from="normalize"), report
