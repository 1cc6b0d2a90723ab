"""Exception types raised across the toolkit.

Every error carries enough context (ids, line numbers, field names) to be
actionable from a batch log. The CLI maps CorpusforgeError to exit code 1
and IoFailureError / OSError to exit code 2.
"""

from __future__ import annotations


class CorpusforgeError(Exception):
    """Base class for all toolkit errors."""


# --- manifest / file parsing ---

class MissingFieldError(CorpusforgeError):
    def __init__(self, field: str, line_no: int, path: str = ""):
        self.field = field
        self.line_no = line_no
        self.path = path
        where = f"{path}:{line_no}" if path else f"line {line_no}"
        super().__init__(f"missing field {field!r} at {where}")


class DuplicateIdError(CorpusforgeError):
    def __init__(self, utt_id: str, line_no: int | None = None):
        self.utt_id = utt_id
        self.line_no = line_no
        at = f" at line {line_no}" if line_no is not None else ""
        super().__init__(f"duplicate utterance id {utt_id!r}{at}")


class MalformedLineError(CorpusforgeError):
    def __init__(self, line_no: int, detail: str, path: str = ""):
        self.line_no = line_no
        self.detail = detail
        self.path = path
        where = f"{path}:{line_no}" if path else f"line {line_no}"
        super().__init__(f"malformed line at {where}: {detail}")


class IoFailureError(CorpusforgeError):
    """Wraps OS-level read/write failures; maps to exit code 2."""


# --- audio ---

class UnsupportedFormatError(CorpusforgeError):
    pass


class CorruptHeaderError(CorpusforgeError):
    pass


class EmptyAudioError(CorpusforgeError):
    """WAV decoded to zero samples; feeds the cleaning pass."""


class FullySilentError(CorpusforgeError):
    """No frame exceeded the trim threshold; caller decides whether to drop."""


class AllZeroError(CorpusforgeError):
    """Volume normalization needs at least one non-zero sample."""


# --- cleaning ---

class ProbeFailureError(CorpusforgeError):
    def __init__(self, utt_id: str, cause: Exception):
        self.utt_id = utt_id
        self.cause = cause
        super().__init__(f"emptiness probe failed for {utt_id!r}: {cause}")


# --- CER engine ---

class EmptyReferenceError(CorpusforgeError):
    pass


class DuplicateHypothesisError(CorpusforgeError):
    def __init__(self, utt_id: str):
        self.utt_id = utt_id
        super().__init__(f"duplicate hypothesis for id {utt_id!r}")


class UnknownExtensionError(CorpusforgeError):
    pass


class EndpointUnreachableError(CorpusforgeError):
    pass


# --- phoneme tables / tokenizer ---

class DuplicateKeyError(CorpusforgeError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"duplicate grapheme key {key!r}")


class MissingHeaderError(CorpusforgeError):
    pass


class EmptyMappingError(CorpusforgeError):
    pass


class UnknownSymbolError(CorpusforgeError):
    def __init__(self, symbol: str, offset: int):
        self.symbol = symbol
        self.offset = offset
        super().__init__(f"unknown symbol {symbol!r} at offset {offset}")


class UnknownLanguageError(CorpusforgeError):
    pass


class UnbalancedMarkerError(CorpusforgeError):
    pass


class NestedMarkerError(CorpusforgeError):
    pass


# --- prompts ---

class NoEligibleSourceError(CorpusforgeError):
    def __init__(self, speaker_id: str, dur_min: float | None, dur_max: float | None):
        self.speaker_id = speaker_id
        have = (
            f"durations span [{dur_min:.3f}, {dur_max:.3f}] s"
            if dur_min is not None and dur_max is not None
            else "no utterances"
        )
        super().__init__(f"no eligible prompt source for speaker {speaker_id!r}: {have}")


class SourceTooShortError(CorpusforgeError):
    pass


# --- evaluation ---

class DimensionMismatchError(CorpusforgeError):
    pass


class ZeroNormError(CorpusforgeError):
    pass


class MissingTruthError(CorpusforgeError):
    def __init__(self, speaker_id: str):
        self.speaker_id = speaker_id
        super().__init__(f"no ground-truth embeddings for speaker {speaker_id!r}")


# --- sampler ---

class NonFiniteStateError(CorpusforgeError):
    def __init__(self, step: int):
        self.step = step
        super().__init__(f"non-finite state at integration step {step}")


# --- CLI ---

class UnknownSubcommandError(CorpusforgeError):
    pass


class ConfigInvalidError(CorpusforgeError):
    def __init__(self, field: str, detail: str):
        self.field = field
        super().__init__(f"invalid config field {field!r}: {detail}")
