from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # oracles / corpusgen helpers

from corpusforge.manifest import Manifest, Utterance

FIXTURES = Path(__file__).parent.parent / "fixtures"


def utt(utt_id: str, speaker: str = "spk", lang: str = "hi", transcript: str = "text",
        duration: float = 1.0, sample_rate: int = 16000) -> Utterance:
    return Utterance(
        id=utt_id, speaker_id=speaker, language=lang,
        audio_path=f"{utt_id}.wav", transcript=transcript,
        duration_s=duration, sample_rate=sample_rate)


def make_manifest(*utts: Utterance) -> Manifest:
    return Manifest.from_utterances(utts)


@pytest.fixture
def tables_dir() -> Path:
    return FIXTURES / "tables"
