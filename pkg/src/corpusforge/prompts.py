"""Duration filtering and zero-shot speech-prompt preparation.

The prompt protocol: pick one clip of 3-4 seconds per target speaker
(seeded, reproducible) and keep only its first 3 seconds. The reference
transcript is deliberately not part of any interface here; the prompt
carries no text.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass

from .audio import AudioBuffer, duration_seconds
from .errors import NoEligibleSourceError, SourceTooShortError
from .manifest import Manifest, Utterance


@dataclass(frozen=True)
class PromptSpec:
    min_source_s: float = 3.0
    max_source_s: float = 4.0
    crop_s: float = 3.0
    seed: int = 0

    def __post_init__(self):
        if self.min_source_s > self.max_source_s:
            raise ValueError("min_source_s must be <= max_source_s")
        if self.crop_s > self.min_source_s:
            raise ValueError("crop_s must be <= min_source_s")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")


def filter_min_duration(m: Manifest, min_s: float = 3.0) -> Manifest:
    """Drop utterances shorter than min_s; the boundary itself is kept."""
    kept = tuple(u for u in m.utterances if u.duration_s >= min_s)
    return Manifest(kept, m.split, created_from=f"filter_min_duration(min_s={min_s})")


def select_prompt_source(m: Manifest, speaker_id: str, spec: PromptSpec | None = None) -> Utterance:
    """Pick one prompt-source utterance for the speaker, uniformly among
    clips whose duration lies in [min_source_s, max_source_s].

    The choice is a function of (seed, speaker_id, eligible set) only: the
    RNG is seeded from a hash of seed and speaker, and candidates are ranked
    by id first, so input ordering is irrelevant.
    """
    spec = spec or PromptSpec()
    candidates = [u for u in m.utterances if u.speaker_id == speaker_id]
    eligible = sorted(
        (u for u in candidates
         if spec.min_source_s <= u.duration_s <= spec.max_source_s),
        key=lambda u: u.id)
    if not eligible:
        durs = [u.duration_s for u in candidates]
        raise NoEligibleSourceError(
            speaker_id, min(durs) if durs else None, max(durs) if durs else None)
    digest = hashlib.sha256(f"{spec.seed}:{speaker_id}".encode("utf-8")).digest()
    rng = random.Random(int.from_bytes(digest[:8], "big"))
    return eligible[rng.randrange(len(eligible))]


def crop_prompt(a: AudioBuffer, spec: PromptSpec | None = None) -> AudioBuffer:
    """First crop_s seconds of the buffer, exactly round(crop_s * sr) samples."""
    spec = spec or PromptSpec()
    want = int(round(spec.crop_s * a.sample_rate))
    if len(a) < want:
        raise SourceTooShortError(
            f"need {spec.crop_s} s ({want} samples), have {duration_seconds(a):.3f} s")
    return AudioBuffer(a.samples[:want], a.sample_rate)


def prompt_sidecar(speaker_id: str, source_id: str, spec: PromptSpec) -> str:
    """JSON sidecar written next to each emitted prompt WAV."""
    return json.dumps(
        {"speaker_id": speaker_id, "source_id": source_id,
         "crop_s": spec.crop_s, "seed": spec.seed},
        ensure_ascii=False) + "\n"
