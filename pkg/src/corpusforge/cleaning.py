"""Transcript hygiene passes: newline stripping, sentence-separator fixes,
per-speaker duplicate removal, and empty-audio removal.

Each pass maps Manifest -> (Manifest, CleaningReport delta), is idempotent,
and never touches ids, audio paths, or durations. Deltas are additive so a
composed run reports the sum of its passes.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from typing import Callable

from .errors import ProbeFailureError
from .manifest import Manifest, Utterance

PIPE = "|"
DANDA = "।"  # DEVANAGARI DANDA, decimal codepoint 2404

# Devanagari-script and Bengali-script languages in the target corpora all
# use the danda as sentence separator.
DEFAULT_DANDA_LANGUAGES = frozenset({"hi", "mr", "bn", "hne"})

_WS_RUN = re.compile(r"\s+")


def normalize_whitespace(text: str) -> str:
    """Collapse whitespace runs (incl. newlines) to single spaces, trim ends."""
    return _WS_RUN.sub(" ", text).strip()


@dataclass(frozen=True)
class PassCounts:
    empty_removed: int = 0
    duplicates_removed: int = 0
    newlines_stripped: int = 0
    separators_fixed: int = 0

    def __add__(self, other: "PassCounts") -> "PassCounts":
        return PassCounts(
            self.empty_removed + other.empty_removed,
            self.duplicates_removed + other.duplicates_removed,
            self.newlines_stripped + other.newlines_stripped,
            self.separators_fixed + other.separators_fixed,
        )

    def is_zero(self) -> bool:
        return self == PassCounts()


@dataclass(frozen=True)
class CleaningReport:
    """Global counts plus the same four counts per speaker."""

    totals: PassCounts = field(default_factory=PassCounts)
    per_speaker: dict[str, PassCounts] = field(default_factory=dict)

    def __add__(self, other: "CleaningReport") -> "CleaningReport":
        merged = dict(self.per_speaker)
        for spk, counts in other.per_speaker.items():
            merged[spk] = merged.get(spk, PassCounts()) + counts
        return CleaningReport(self.totals + other.totals, merged)

    def is_zero(self) -> bool:
        return self.totals.is_zero()

    def to_json(self) -> str:
        def counts_dict(c: PassCounts) -> dict:
            return {
                "empty_removed": c.empty_removed,
                "duplicates_removed": c.duplicates_removed,
                "newlines_stripped": c.newlines_stripped,
                "separators_fixed": c.separators_fixed,
            }

        payload = counts_dict(self.totals)
        payload["per_speaker"] = {
            spk: counts_dict(self.per_speaker[spk]) for spk in sorted(self.per_speaker)
        }
        return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"

    def render_table(self) -> str:
        header = ("speaker", "empty", "dups", "newlines", "separators")
        rows = [header]
        for spk in sorted(self.per_speaker):
            c = self.per_speaker[spk]
            rows.append((spk, str(c.empty_removed), str(c.duplicates_removed),
                         str(c.newlines_stripped), str(c.separators_fixed)))
        t = self.totals
        rows.append(("TOTAL", str(t.empty_removed), str(t.duplicates_removed),
                     str(t.newlines_stripped), str(t.separators_fixed)))
        widths = [max(len(r[c]) for r in rows) for c in range(5)]
        lines = []
        for r in rows:
            lines.append("  ".join(
                f"{r[0]:<{widths[0]}}" if c == 0 else f"{r[c]:>{widths[c]}}"
                for c in range(5)))
        return "\n".join(lines) + "\n"


def _report(per_speaker: dict[str, PassCounts]) -> CleaningReport:
    totals = PassCounts()
    for counts in per_speaker.values():
        totals = totals + counts
    return CleaningReport(totals, per_speaker)


@dataclass(frozen=True)
class SeparatorPolicy:
    """Which languages get the pipe-to-danda correction."""

    languages: frozenset[str] = DEFAULT_DANDA_LANGUAGES
    from_char: str = PIPE
    to_char: str = DANDA

    def __post_init__(self):
        object.__setattr__(self, "languages", frozenset(self.languages))
        if self.from_char == self.to_char:
            raise ValueError("from_char and to_char must differ")


def strip_newlines(m: Manifest) -> tuple[Manifest, CleaningReport]:
    """Replace newline characters with spaces, collapse whitespace runs,
    trim ends. Counts utterances modified."""
    out: list[Utterance] = []
    per_speaker: dict[str, PassCounts] = {}
    for u in m:
        cleaned = normalize_whitespace(u.transcript)
        if cleaned != u.transcript:
            per_speaker[u.speaker_id] = per_speaker.get(u.speaker_id, PassCounts()) + \
                PassCounts(newlines_stripped=1)
            u = replace(u, transcript=cleaned)
        out.append(u)
    return Manifest(tuple(out), m.split, m.created_from), _report(per_speaker)


def fix_separators(m: Manifest, policy: SeparatorPolicy | None = None) -> tuple[Manifest, CleaningReport]:
    """Replace every ASCII pipe with the danda in transcripts of the policy's
    languages. Counts replaced characters."""
    policy = policy or SeparatorPolicy()
    out: list[Utterance] = []
    per_speaker: dict[str, PassCounts] = {}
    for u in m:
        if u.language in policy.languages:
            n = u.transcript.count(policy.from_char)
            if n:
                per_speaker[u.speaker_id] = per_speaker.get(u.speaker_id, PassCounts()) + \
                    PassCounts(separators_fixed=n)
                u = replace(u, transcript=u.transcript.replace(policy.from_char, policy.to_char))
        out.append(u)
    return Manifest(tuple(out), m.split, m.created_from), _report(per_speaker)


def dedupe_transcripts(m: Manifest) -> tuple[Manifest, CleaningReport]:
    """Within each speaker, drop utterances whose whitespace-normalized
    transcript repeats an earlier (by id order) one; the first copy survives.
    Duplicates across speakers are legitimate and kept."""
    seen: dict[str, set[str]] = {}
    out: list[Utterance] = []
    per_speaker: dict[str, PassCounts] = {}
    for u in m:  # manifest iterates in id order
        key = normalize_whitespace(u.transcript)
        speaker_seen = seen.setdefault(u.speaker_id, set())
        if key in speaker_seen:
            per_speaker[u.speaker_id] = per_speaker.get(u.speaker_id, PassCounts()) + \
                PassCounts(duplicates_removed=1)
            continue
        speaker_seen.add(key)
        out.append(u)
    return Manifest(tuple(out), m.split, m.created_from), _report(per_speaker)


def remove_empty(m: Manifest, probe: Callable[[Utterance], bool]) -> tuple[Manifest, CleaningReport]:
    """Drop utterances the probe reports as empty. The probe decides what
    empty means (zero samples, fully silent, ...); its failures propagate as
    ProbeFailureError with the utterance id attached."""
    out: list[Utterance] = []
    per_speaker: dict[str, PassCounts] = {}
    for u in m:
        try:
            is_empty = probe(u)
        except Exception as exc:
            raise ProbeFailureError(u.id, exc) from exc
        if is_empty:
            per_speaker[u.speaker_id] = per_speaker.get(u.speaker_id, PassCounts()) + \
                PassCounts(empty_removed=1)
            continue
        out.append(u)
    return Manifest(tuple(out), m.split, m.created_from), _report(per_speaker)


def clean_all(m: Manifest, policy: SeparatorPolicy | None = None,
              probe: Callable[[Utterance], bool] | None = None,
              ) -> tuple[Manifest, CleaningReport]:
    """Canonical pass order: strip_newlines, fix_separators, dedupe, then
    remove_empty (skipped when no probe is given)."""
    m, report = strip_newlines(m)
    m, delta = fix_separators(m, policy)
    report = report + delta
    m, delta = dedupe_transcripts(m)
    report = report + delta
    if probe is not None:
        m, delta = remove_empty(m, probe)
        report = report + delta
    return m, report
