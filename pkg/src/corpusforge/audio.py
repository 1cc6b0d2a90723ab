"""PCM WAV decode/encode and the preprocessing DSP passes.

Only 16-bit PCM mono RIFF/WAVE is accepted: the corpora this toolkit targets
are distributed in that form, and rejecting anything else fails loudly
instead of resampling silently. All operations are pure functions of their
inputs and safe to run concurrently across files.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    AllZeroError,
    CorruptHeaderError,
    EmptyAudioError,
    FullySilentError,
    IoFailureError,
    UnsupportedFormatError,
)

INT16_SCALE = 32768  # decode divisor; encode uses 32767 with saturation


@dataclass(frozen=True)
class AudioBuffer:
    """Decoded mono audio: float samples in [-1, 1] plus sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        object.__setattr__(
            self, "samples", np.asarray(self.samples, dtype=np.float64))
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be > 0")

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class TrimSpec:
    """Silence-trim parameters.

    threshold_db is relative to the clip's own loudest frame (a frame is
    non-silent iff its RMS is within threshold_db of the peak frame RMS).
    frame_len defaults to hop_len: with the boundary taken at the first and
    last non-silent frame edge, non-overlapping frames bound the boundary
    error by one hop.
    """

    threshold_db: float = 50.0
    pad_s: float = 0.2
    frame_len: int = 512
    hop_len: int = 512

    def __post_init__(self):
        if self.threshold_db <= 0:
            raise ValueError("threshold_db must be positive")
        if self.pad_s < 0:
            raise ValueError("pad_s must be >= 0")
        if self.frame_len < 1:
            raise ValueError("frame_len must be >= 1")
        if not 0 < self.hop_len <= self.frame_len:
            raise ValueError("hop_len must satisfy 0 < hop_len <= frame_len")


@dataclass(frozen=True)
class TrimResult:
    """Trimmed-and-padded audio plus content boundaries in the input signal."""

    audio: AudioBuffer
    start_sample: int
    end_sample: int  # exclusive


def decode_wav(path: str | Path) -> AudioBuffer:
    """Decode a 16-bit PCM mono WAV; int16 values map to [-1, 1] by /32768."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise IoFailureError(f"cannot read {path}: {exc}") from exc

    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise CorruptHeaderError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        chunk_id = raw[pos:pos + 4]
        (chunk_size,) = struct.unpack_from("<I", raw, pos + 4)
        body = raw[pos + 8:pos + 8 + chunk_size]
        if chunk_id == b"fmt ":
            fmt = body
        elif chunk_id == b"data":
            if len(body) < chunk_size:
                raise CorruptHeaderError(f"{path}: truncated data chunk")
            data = body
            break  # fmt precedes data in every writer we accept
        pos += 8 + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    if fmt is None or len(fmt) < 16:
        raise CorruptHeaderError(f"{path}: missing or short fmt chunk")
    if data is None:
        raise CorruptHeaderError(f"{path}: missing data chunk")

    audio_format, channels, sample_rate, _, _, bits = struct.unpack_from("<HHIIHH", fmt, 0)
    if audio_format != 1:
        raise UnsupportedFormatError(f"{path}: audio format {audio_format} (need PCM)")
    if channels != 1:
        raise UnsupportedFormatError(f"{path}: {channels} channels (need mono)")
    if bits != 16:
        raise UnsupportedFormatError(f"{path}: {bits} bits per sample (need 16)")

    if len(data) == 0:
        raise EmptyAudioError(f"{path}: zero-length data chunk")
    ints = np.frombuffer(data[:len(data) - (len(data) % 2)], dtype="<i2")
    return AudioBuffer(ints.astype(np.float64) / INT16_SCALE, sample_rate)


def encode_wav(a: AudioBuffer, path: str | Path) -> None:
    """Write 16-bit PCM mono WAV.

    Samples are quantized as round(x * 32768) saturated to [-32768, 32767];
    the symmetric scale keeps the decode round trip within 1/32768 per sample
    (an asymmetric 32767 scale would not).
    """
    path = Path(path)
    ints = np.rint(a.samples * INT16_SCALE)
    ints = np.clip(ints, -INT16_SCALE, INT16_SCALE - 1).astype("<i2")
    data = ints.tobytes()
    byte_rate = a.sample_rate * 2
    header = b"".join([
        b"RIFF",
        struct.pack("<I", 36 + len(data)),
        b"WAVE",
        b"fmt ",
        struct.pack("<IHHIIHH", 16, 1, 1, a.sample_rate, byte_rate, 2, 16),
        b"data",
        struct.pack("<I", len(data)),
    ])
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(header + data)
    except OSError as exc:
        raise IoFailureError(f"cannot write {path}: {exc}") from exc


def wav_duration(path: str | Path) -> tuple[float, int]:
    """(duration seconds, sample rate) for a WAV file.

    Decodes the file fully so that format errors surface here rather than
    later in the pipeline; zero-data files report duration 0.0.
    """
    try:
        buf = decode_wav(path)
    except EmptyAudioError:
        # still need the sample rate for the manifest record
        raw = Path(path).read_bytes()
        pos = 12
        while pos + 8 <= len(raw):
            if raw[pos:pos + 4] == b"fmt ":
                (_, _, sample_rate) = struct.unpack_from("<HHI", raw, pos + 8)
                return 0.0, sample_rate
            (chunk_size,) = struct.unpack_from("<I", raw, pos + 4)
            pos += 8 + chunk_size + (chunk_size & 1)
        raise
    return duration_seconds(buf), buf.sample_rate


def _frame_rms(samples: np.ndarray, frame_len: int, hop_len: int) -> np.ndarray:
    """RMS per frame at stride hop_len; the final partial frame is zero-padded."""
    n = len(samples)
    n_frames = max(1, (n + hop_len - 1) // hop_len)
    csum = np.concatenate([[0.0], np.cumsum(samples * samples)])
    starts = np.arange(n_frames) * hop_len
    ends = np.minimum(starts + frame_len, n)
    return np.sqrt((csum[ends] - csum[starts]) / frame_len)


def trim_silence(a: AudioBuffer, spec: TrimSpec | None = None) -> TrimResult:
    """Cut leading/trailing silence, then pad both ends with pad_s of zeros.

    A frame is non-silent iff 20*log10(rms / peak_frame_rms) > -threshold_db.
    Content runs from the first non-silent frame start to the last non-silent
    frame end. Raises FullySilentError when no frame has any energy.
    """
    spec = spec or TrimSpec()
    if len(a) == 0:
        raise FullySilentError("empty signal")
    rms = _frame_rms(a.samples, spec.frame_len, spec.hop_len)
    ref = rms.max()
    if ref <= 0.0:
        raise FullySilentError("no frame exceeds the silence threshold")
    # rms > ref * 10^(-th/20) is the same predicate without log-of-zero issues
    mask = rms > ref * (10.0 ** (-spec.threshold_db / 20.0))
    nonzero = np.flatnonzero(mask)
    first, last = int(nonzero[0]), int(nonzero[-1])
    start = first * spec.hop_len
    end = min(last * spec.hop_len + spec.frame_len, len(a))
    pad = int(round(spec.pad_s * a.sample_rate))
    zeros = np.zeros(pad, dtype=np.float64)
    out = np.concatenate([zeros, a.samples[start:end], zeros])
    return TrimResult(AudioBuffer(out, a.sample_rate), start, end)


def normalize_volume(a: AudioBuffer, target_peak: float = 0.995) -> AudioBuffer:
    """Scale so the absolute peak equals target_peak. Raises AllZeroError
    for silent input; a buffer already at the target comes back unchanged."""
    if not 0.0 < target_peak <= 1.0:
        raise ValueError("target_peak must be in (0, 1]")
    peak = np.abs(a.samples).max() if len(a) else 0.0
    if peak == 0.0:
        raise AllZeroError("cannot normalize an all-zero buffer")
    return AudioBuffer(a.samples * (target_peak / peak), a.sample_rate)


def duration_seconds(a: AudioBuffer) -> float:
    return len(a.samples) / a.sample_rate
