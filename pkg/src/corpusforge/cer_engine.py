"""Character error rate: edit distance, per-utterance CER records,
top-N-per-speaker selection, and hypothesis ingestion (files or ASR service).

CER counts Unicode scalar values, which is what Python string indexing
gives; this matters for Indic combining marks and matches common ASR
tooling. Text normalization (NFC + whitespace collapse) is applied by
default because raw corpora drown CER in encoding noise; pass norm="none"
to rank on raw strings.
"""

from __future__ import annotations

import json
import logging
import time
import unicodedata
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .cleaning import normalize_whitespace
from .errors import (
    DuplicateHypothesisError,
    EmptyReferenceError,
    EndpointUnreachableError,
    IoFailureError,
    MalformedLineError,
    UnknownExtensionError,
)
from .manifest import Manifest

log = logging.getLogger(__name__)

NORM_MODES = ("none", "nfc", "casefold")


@dataclass(frozen=True)
class HypothesisRecord:
    id: str
    hypothesis: str


@dataclass(frozen=True)
class CerRecord:
    id: str
    reference: str
    hypothesis: str
    distance: int
    cer: float

    def to_record(self) -> dict:
        # wire format carries only id, cer, distance
        return {"id": self.id, "cer": self.cer, "distance": self.distance}


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance over Unicode scalar values.

    Single-row dynamic programme with common prefix/suffix stripping; this
    function sits in a hot loop over whole corpora, so it avoids per-row
    allocations.
    """
    if a == b:
        return 0
    la, lb = len(a), len(b)
    m = la if la < lb else lb
    i = 0
    while i < m and a[i] == b[i]:
        i += 1
    j = 0
    while j < m - i and a[la - 1 - j] == b[lb - 1 - j]:
        j += 1
    a = a[i:la - j]
    b = b[i:lb - j]
    if not a:
        return len(b)
    if not b:
        return len(a)
    row = list(range(len(b) + 1))
    for r, ca in enumerate(a, 1):
        diag = row[0]
        row[0] = r
        c = 1
        for cb in b:
            prev = row[c]
            best = diag if ca == cb else diag + 1
            if prev + 1 < best:
                best = prev + 1
            if row[c - 1] + 1 < best:
                best = row[c - 1] + 1
            row[c] = best
            diag = prev
            c += 1
    return row[-1]


def normalize_text(text: str, norm: str = "nfc") -> str:
    """Apply the requested normalization: NFC plus whitespace collapsing,
    optionally case folding ("casefold", relevant to English only)."""
    if norm not in NORM_MODES:
        raise ValueError(f"norm must be one of {NORM_MODES}, got {norm!r}")
    if norm == "none":
        return text
    text = normalize_whitespace(unicodedata.normalize("NFC", text))
    if norm == "casefold":
        text = text.lower()
    return text


def cer(reference: str, hypothesis: str, norm: str = "nfc", utt_id: str = "") -> CerRecord:
    """CER = edit distance / reference length in Unicode scalar values."""
    ref = normalize_text(reference, norm)
    hyp = normalize_text(hypothesis, norm)
    if not ref:
        raise EmptyReferenceError(
            f"reference for {utt_id!r} is empty after normalization" if utt_id
            else "reference is empty after normalization")
    distance = edit_distance(ref, hyp)
    return CerRecord(utt_id, ref, hyp, distance, distance / len(ref))


def select_top_n(m: Manifest, records: Iterable[CerRecord], n: int) -> Manifest:
    """Keep the n lowest-CER utterances per speaker (ties broken by id).

    Every record must join to a manifest utterance. Speakers with fewer than
    n records keep everything they have. The result is independent of the
    record input order.
    """
    if n < 1:
        raise ValueError("n must be positive")
    speaker_of = m.speaker_of()
    per_speaker: dict[str, list[CerRecord]] = {}
    for rec in records:
        if rec.id not in speaker_of:
            raise KeyError(f"CER record id {rec.id!r} not present in manifest")
        per_speaker.setdefault(speaker_of[rec.id], []).append(rec)

    keep: set[str] = set()
    for recs in per_speaker.values():
        recs.sort(key=lambda r: (r.cer, r.id))
        keep.update(r.id for r in recs[:n])
    return m.subset(keep, created_from=f"select_top_n(n={n})")


def ingest_hypotheses(path: str | Path) -> list[HypothesisRecord]:
    """Read hypotheses from a sidecar file.

    Format by extension: .tsv is "id<TAB>hypothesis" per line, .jsonl is
    {"id": ..., "hypothesis": ...} per line. Duplicate ids are rejected.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix not in (".tsv", ".jsonl"):
        raise UnknownExtensionError(f"{path}: expected .tsv or .jsonl")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailureError(f"cannot read hypotheses {path}: {exc}") from exc

    records: list[HypothesisRecord] = []
    seen: set[str] = set()
    for line_no, line in enumerate(text.split("\n"), 1):
        if not line.strip():
            continue
        if suffix == ".tsv":
            if "\t" not in line:
                raise MalformedLineError(line_no, "expected id<TAB>hypothesis", str(path))
            utt_id, hyp = line.split("\t", 1)
        else:
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLineError(line_no, f"invalid JSON: {exc.msg}", str(path)) from exc
            if not isinstance(obj, dict) or "id" not in obj or "hypothesis" not in obj:
                raise MalformedLineError(line_no, 'need {"id", "hypothesis"}', str(path))
            utt_id, hyp = str(obj["id"]), str(obj["hypothesis"])
        if utt_id in seen:
            raise DuplicateHypothesisError(utt_id)
        seen.add(utt_id)
        records.append(HypothesisRecord(utt_id, hyp))
    return records


@dataclass(frozen=True)
class FetchReport:
    """Outcome of an ASR-service run: successful records plus the ids that
    failed after retries (a partial failure is a report, not an exception)."""

    records: tuple[HypothesisRecord, ...]
    failures: tuple[tuple[str, str], ...]  # (utterance id, reason)

    @property
    def partial(self) -> bool:
        return bool(self.failures)


def _default_post(endpoint: str, body: bytes, timeout: float) -> str:
    req = urllib.request.Request(
        endpoint, data=body, headers={"Content-Type": "audio/wav"}, method="POST")
    with urllib.request.urlopen(req, timeout=timeout) as resp:
        payload = json.loads(resp.read().decode("utf-8"))
    return str(payload["text"])


def fetch_hypotheses(endpoint: str, m: Manifest, audio_root: str | Path = ".",
                     attempts: int = 3, backoff_s: float = 0.5,
                     concurrency: int = 4, timeout: float = 30.0,
                     post=_default_post) -> FetchReport:
    """POST each utterance's WAV bytes to an ASR endpoint.

    The service contract is: request body = WAV bytes, content type
    audio/wav, response JSON {"text": ...}. Each utterance gets up to
    `attempts` tries with exponential backoff; failures are recorded per
    utterance rather than aborting the batch. Raises EndpointUnreachableError
    only when nothing at all succeeded. Results come back in canonical id
    order regardless of concurrency.
    """
    audio_root = Path(audio_root)
    if len(m) == 0:
        return FetchReport((), ())

    def one(u) -> tuple[str, str | None, str | None]:
        try:
            body = (audio_root / u.audio_path).read_bytes()
        except OSError as exc:
            return u.id, None, f"read failed: {exc}"
        delay = backoff_s
        last = "no attempts made"
        for attempt in range(attempts):
            try:
                return u.id, post(endpoint, body, timeout), None
            except Exception as exc:
                last = str(exc)
                if attempt + 1 < attempts:
                    time.sleep(delay)
                    delay *= 2
        return u.id, None, last

    with ThreadPoolExecutor(max_workers=max(1, concurrency)) as pool:
        outcomes = list(pool.map(one, m.utterances))

    records = tuple(HypothesisRecord(i, text) for i, text, _ in outcomes if text is not None)
    failures = tuple((i, reason) for i, _, reason in outcomes if reason is not None)
    if not records:
        raise EndpointUnreachableError(
            f"no successful responses from {endpoint} "
            f"({len(failures)} utterances failed after {attempts} attempts)")
    if failures:
        log.warning("ASR service failed for %d/%d utterances", len(failures), len(m))
    return FetchReport(records, failures)


def cer_records_to_jsonl(records: Iterable[CerRecord]) -> str:
    return "\n".join(json.dumps(r.to_record(), ensure_ascii=False) for r in records) + "\n"


def load_cer_jsonl(path: str | Path) -> list[CerRecord]:
    """Read back the wire-format CER records (id, cer, distance)."""
    path = Path(path)
    records = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").split("\n"), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            records.append(CerRecord(str(obj["id"]), "", "", int(obj["distance"]),
                                     float(obj["cer"])))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise MalformedLineError(line_no, str(exc), str(path)) from exc
    return records
