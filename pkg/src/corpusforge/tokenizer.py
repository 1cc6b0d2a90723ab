"""Shared-alphabet tokenization: per-language grapheme-to-phoneme tables with
greedy longest-match lookup and inline code-switching.

Tables are plain TSV so token inventories stay user-auditable data, not
code. Tokenization is pure; tables are immutable after load.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import (
    DuplicateKeyError,
    EmptyMappingError,
    IoFailureError,
    MalformedLineError,
    MissingHeaderError,
    NestedMarkerError,
    UnbalancedMarkerError,
    UnknownLanguageError,
    UnknownSymbolError,
)

WORD_BOUNDARY = "|w"
UNKNOWN_TOKEN = "<unk>"
UNKNOWN_POLICIES = ("error", "skip", "unk")

_HEADER = re.compile(r"^#lang:(\S+)\s*$")
_OPEN_MARKER = re.compile(r"\[lang:([A-Za-z0-9_-]+)\]")
CLOSE_MARKER = "[/lang]"


@dataclass(frozen=True)
class PhonemeTable:
    """Grapheme-sequence to phoneme-token mapping for one language.

    Entries are held in longest-match priority order (descending key length,
    then lexicographic) so greedy lookup can walk them deterministically.
    """

    language: str
    entries: dict[str, tuple[str, ...]]

    def __post_init__(self):
        ordered = dict(sorted(self.entries.items(), key=lambda kv: (-len(kv[0]), kv[0])))
        object.__setattr__(self, "entries", ordered)
        lengths = sorted({len(k) for k in ordered}, reverse=True)
        object.__setattr__(self, "_key_lengths", tuple(lengths))
        for key, tokens in ordered.items():
            if not key:
                raise EmptyMappingError(f"table {self.language!r}: empty grapheme key")
            if not tokens:
                raise EmptyMappingError(
                    f"table {self.language!r}: key {key!r} maps to no tokens")

    def match_at(self, text: str, pos: int) -> tuple[str, tuple[str, ...]] | None:
        """Longest table key matching at text[pos:], or None."""
        remaining = len(text) - pos
        for length in self._key_lengths:  # descending
            if length > remaining:
                continue
            candidate = text[pos:pos + length]
            tokens = self.entries.get(candidate)
            if tokens is not None:
                return candidate, tokens
        return None


@dataclass(frozen=True)
class TokenSequence:
    """Phoneme tokens, each tagged with the language table that produced it."""

    tokens: tuple[tuple[str, str], ...]  # (token, source_language)

    def __len__(self) -> int:
        return len(self.tokens)

    def texts(self) -> list[str]:
        return [t for t, _ in self.tokens]

    def to_text(self) -> str:
        return " ".join(t for t, _ in self.tokens)

    def to_record(self, utt_id: str) -> dict:
        return {"id": utt_id,
                "tokens": [{"token": t, "lang": lang} for t, lang in self.tokens]}

    def __add__(self, other: "TokenSequence") -> "TokenSequence":
        return TokenSequence(self.tokens + other.tokens)


def load_table(path: str | Path) -> PhonemeTable:
    """Parse a table TSV: header line "#lang:<code>", then one
    "grapheme<TAB>space-separated tokens" row per entry."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").split("\n")
    except OSError as exc:
        raise IoFailureError(f"cannot read table {path}: {exc}") from exc
    header = _HEADER.match(lines[0]) if lines else None
    if header is None:
        raise MissingHeaderError(f"{path}: first line must be #lang:<code>")
    language = header.group(1)

    entries: dict[str, tuple[str, ...]] = {}
    for line_no, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        if "\t" not in line:
            raise MalformedLineError(line_no, "expected grapheme<TAB>tokens", str(path))
        key, _, token_part = line.partition("\t")
        if not key:
            raise MalformedLineError(line_no, "empty grapheme key", str(path))
        tokens = tuple(token_part.split())
        if not tokens:
            raise EmptyMappingError(f"{path}:{line_no}: key {key!r} maps to no tokens")
        if key in entries:
            raise DuplicateKeyError(key)
        entries[key] = tokens
    return PhonemeTable(language, entries)


def load_tables(paths: Iterable[str | Path]) -> dict[str, PhonemeTable]:
    tables: dict[str, PhonemeTable] = {}
    for p in paths:
        table = load_table(p)
        if table.language in tables:
            raise DuplicateKeyError(f"language {table.language!r} loaded twice")
        tables[table.language] = table
    return tables


def tokenize(text: str, table: PhonemeTable, unknown_policy: str = "error") -> TokenSequence:
    """Greedy longest-match tokenization, left to right.

    The text is NFC-normalized first. Runs of whitespace emit a single
    word-boundary token. Scalars no table key matches are handled per
    unknown_policy: "error" raises (naming the scalar and its offset in the
    normalized text), "skip" drops them, "unk" emits the unknown token.
    """
    if unknown_policy not in UNKNOWN_POLICIES:
        raise ValueError(f"unknown_policy must be one of {UNKNOWN_POLICIES}")
    text = unicodedata.normalize("NFC", text)
    out: list[tuple[str, str]] = []
    lang = table.language
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            while pos < n and text[pos].isspace():
                pos += 1
            out.append((WORD_BOUNDARY, lang))
            continue
        matched = table.match_at(text, pos)
        if matched is not None:
            key, tokens = matched
            out.extend((t, lang) for t in tokens)
            pos += len(key)
            continue
        if unknown_policy == "error":
            raise UnknownSymbolError(text[pos], pos)
        if unknown_policy == "unk":
            out.append((UNKNOWN_TOKEN, lang))
        pos += 1
    return TokenSequence(tuple(out))


def tokenize_code_switched(text: str, tables: Mapping[str, PhonemeTable],
                           default_lang: str, unknown_policy: str = "error") -> TokenSequence:
    """Tokenize text with inline [lang:<code>]...[/lang] segments.

    Marked segments use that language's table; text outside markers uses
    default_lang. Markers may not nest. With a single language and no
    markers this reduces exactly to tokenize().
    """
    if default_lang not in tables:
        raise UnknownLanguageError(f"default language {default_lang!r} has no table")

    segments: list[tuple[str, str]] = []  # (text, language)
    pos = 0
    while pos < len(text):
        m = _OPEN_MARKER.search(text, pos)
        close_at = text.find(CLOSE_MARKER, pos)
        if close_at != -1 and (m is None or close_at < m.start()):
            raise UnbalancedMarkerError(f"[/lang] at offset {close_at} has no opener")
        if m is None:
            segments.append((text[pos:], default_lang))
            break
        if m.start() > pos:
            segments.append((text[pos:m.start()], default_lang))
        lang = m.group(1)
        if lang not in tables:
            raise UnknownLanguageError(f"no table for language {lang!r}")
        body_start = m.end()
        close_at = text.find(CLOSE_MARKER, body_start)
        if close_at == -1:
            raise UnbalancedMarkerError(f"[lang:{lang}] at offset {m.start()} is never closed")
        inner_open = _OPEN_MARKER.search(text, body_start, close_at)
        if inner_open is not None:
            raise NestedMarkerError(
                f"[lang:{inner_open.group(1)}] nested inside [lang:{lang}]")
        segments.append((text[body_start:close_at], lang))
        pos = close_at + len(CLOSE_MARKER)

    seq = TokenSequence(())
    for body, lang in segments:
        if body:
            seq = seq + tokenize(body, tables[lang], unknown_policy)
    return seq


def sequences_to_jsonl(pairs: Iterable[tuple[str, TokenSequence]]) -> str:
    return "\n".join(json.dumps(seq.to_record(i), ensure_ascii=False)
                     for i, seq in pairs) + "\n"


def sequences_to_text(pairs: Iterable[tuple[str, TokenSequence]]) -> str:
    return "\n".join(f"{i}\t{seq.to_text()}" for i, seq in pairs) + "\n"
