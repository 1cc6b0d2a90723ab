"""corpusforge: corpus preparation, filtering, and evaluation for
multilingual TTS datasets."""

from .audio import (
    AudioBuffer,
    TrimResult,
    TrimSpec,
    decode_wav,
    duration_seconds,
    encode_wav,
    normalize_volume,
    trim_silence,
)
from .cer_engine import (
    CerRecord,
    HypothesisRecord,
    cer,
    edit_distance,
    fetch_hypotheses,
    ingest_hypotheses,
    select_top_n,
)
from .cleaning import (
    CleaningReport,
    SeparatorPolicy,
    dedupe_transcripts,
    fix_separators,
    remove_empty,
    strip_newlines,
)
from .evaluation import (
    EmbeddingVector,
    EvalReport,
    cer_report,
    cosine_similarity,
    speaker_similarity_report,
)
from .manifest import (
    Manifest,
    SpeakerStats,
    SplitConfig,
    Utterance,
    compute_stats,
    load_manifest,
    save_manifest,
    split_train_val,
)
from .prompts import PromptSpec, crop_prompt, filter_min_duration, select_prompt_source
from .sampler import SamplerConfig, cfg_combine, euler_integrate, euler_trajectory
from .tokenizer import PhonemeTable, TokenSequence, load_table, tokenize, tokenize_code_switched

__version__ = "0.1.0"

__all__ = [
    "AudioBuffer", "TrimResult", "TrimSpec", "decode_wav", "duration_seconds",
    "encode_wav", "normalize_volume", "trim_silence",
    "CerRecord", "HypothesisRecord", "cer", "edit_distance", "fetch_hypotheses",
    "ingest_hypotheses", "select_top_n",
    "CleaningReport", "SeparatorPolicy", "dedupe_transcripts", "fix_separators",
    "remove_empty", "strip_newlines",
    "EmbeddingVector", "EvalReport", "cer_report", "cosine_similarity",
    "speaker_similarity_report",
    "Manifest", "SpeakerStats", "SplitConfig", "Utterance", "compute_stats",
    "load_manifest", "save_manifest", "split_train_val",
    "PromptSpec", "crop_prompt", "filter_min_duration", "select_prompt_source",
    "SamplerConfig", "cfg_combine", "euler_integrate", "euler_trajectory",
    "PhonemeTable", "TokenSequence", "load_table", "tokenize",
    "tokenize_code_switched",
    "__version__",
]
