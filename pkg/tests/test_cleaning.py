from __future__ import annotations

import json

import pytest

from corpusforge.cleaning import (
    PassCounts,
    SeparatorPolicy,
    clean_all,
    dedupe_transcripts,
    fix_separators,
    remove_empty,
    strip_newlines,
)
from corpusforge.errors import ProbeFailureError

from conftest import make_manifest, utt

PIPE = "|"
DANDA = "।"


# --- strip_newlines ---

@pytest.mark.parametrize("raw,expected", [
    ("ab\ncd", "ab cd"),
    ("ab\r\ncd", "ab cd"),
    ("a\rb", "a b"),
    ("  spaced\tout  ", "spaced out"),
])
def test_strip_newlines_collapses(raw, expected):
    m, report = strip_newlines(make_manifest(utt("a", transcript=raw)))
    assert m.utterances[0].transcript == expected
    assert report.totals.newlines_stripped == 1


def test_strip_newlines_identity():
    m0 = make_manifest(utt("a", transcript="no newlines here"))
    m, report = strip_newlines(m0)
    assert m == m0
    assert report.is_zero()


# --- fix_separators ---

def test_fix_separators_hindi_pipe_to_danda():
    m, report = fix_separators(make_manifest(utt("a", lang="hi", transcript="नमस्ते|")))
    assert m.utterances[0].transcript == "नमस्ते" + DANDA
    assert report.totals.separators_fixed == 1


def test_fix_separators_ignores_languages_outside_policy():
    m0 = make_manifest(utt("a", lang="en", transcript="a|b"))
    m, report = fix_separators(m0)
    assert m == m0
    assert report.is_zero()


def test_fix_separators_counts_every_pipe():
    m, report = fix_separators(make_manifest(
        utt("a", lang="mr", transcript="x|y|z|")))
    assert report.totals.separators_fixed == 3
    assert PIPE not in m.utterances[0].transcript
    assert m.utterances[0].transcript.count(DANDA) == 3


def test_fix_separators_custom_policy():
    policy = SeparatorPolicy(languages=frozenset({"en"}))
    m, report = fix_separators(make_manifest(utt("a", lang="en", transcript="a|b")), policy)
    assert m.utterances[0].transcript == "a" + DANDA + "b"
    assert report.totals.separators_fixed == 1


# --- dedupe ---

def test_dedupe_keeps_first_by_id_order():
    m, report = dedupe_transcripts(make_manifest(
        utt("a", transcript="t"), utt("b", transcript="t"), utt("c", transcript="u")))
    assert m.ids() == ["a", "c"]
    assert report.totals.duplicates_removed == 1


def test_dedupe_is_scoped_per_speaker():
    # brute-force oracle: group by (speaker, normalized transcript), expect
    # every group to keep exactly its lowest id
    utts = [
        utt("a", speaker="s1", transcript="same"),
        utt("b", speaker="s2", transcript="same"),
        utt("c", speaker="s1", transcript="same"),
        utt("d", speaker="s2", transcript="other"),
        utt("e", speaker="s1", transcript=" same "),
    ]
    groups: dict[tuple[str, str], list[str]] = {}
    for u in utts:
        groups.setdefault((u.speaker_id, " ".join(u.transcript.split())), []).append(u.id)
    expected = sorted(min(ids) for ids in groups.values())

    m, report = dedupe_transcripts(make_manifest(*utts))
    assert m.ids() == expected
    assert report.totals.duplicates_removed == len(utts) - len(expected)


def test_dedupe_idempotent():
    m0 = make_manifest(utt("a", transcript="t"), utt("b", transcript="t"))
    m1, first = dedupe_transcripts(m0)
    m2, second = dedupe_transcripts(m1)
    assert first.totals.duplicates_removed == 1
    assert m2 == m1
    assert second.is_zero()


# --- remove_empty ---

def test_remove_empty_drops_probed_utterances():
    utts = [utt(f"u{i}", duration=0.0 if i == 2 else 1.0) for i in range(5)]
    m, report = remove_empty(make_manifest(*utts), lambda u: u.duration_s <= 0)
    assert len(m) == 4
    assert report.totals.empty_removed == 1
    assert "u2" not in m.ids()


def test_remove_empty_identity_when_no_empties():
    m0 = make_manifest(utt("a"), utt("b"))
    m, report = remove_empty(m0, lambda u: False)
    assert m == m0
    assert report.is_zero()


def test_remove_empty_per_speaker_accounting():
    # the report reproduces prose like "1 in hi_m1 and 4 in te_f1"
    utts = [utt("a", speaker="hi_m1", duration=0.0)]
    utts += [utt(f"t{i}", speaker="te_f1", duration=0.0) for i in range(4)]
    utts += [utt(f"k{i}", speaker="te_f1", duration=1.0) for i in range(3)]
    _, report = remove_empty(make_manifest(*utts), lambda u: u.duration_s <= 0)
    assert report.per_speaker["hi_m1"].empty_removed == 1
    assert report.per_speaker["te_f1"].empty_removed == 4
    payload = json.loads(report.to_json())
    assert payload["per_speaker"]["te_f1"]["empty_removed"] == 4


def test_probe_failure_carries_utterance_id():
    def probe(u):
        raise OSError("disk fell off")

    with pytest.raises(ProbeFailureError) as err:
        remove_empty(make_manifest(utt("a")), probe)
    assert err.value.utt_id == "a"


# --- cross-pass properties ---

def _dirty_manifest():
    return make_manifest(
        utt("a", speaker="s1", lang="hi", transcript="नमस्ते|\nभारत"),
        utt("b", speaker="s1", lang="hi", transcript="नमस्ते। भारत"),
        utt("c", speaker="s2", lang="en", transcript="hello|world"),
        utt("d", speaker="s2", lang="en", transcript="hello|world"),
        utt("e", speaker="s1", lang="hi", transcript="पानी", duration=0.0),
    )


def test_passes_preserve_ids_paths_durations():
    m0 = _dirty_manifest()
    m1, _ = clean_all(m0, probe=None)
    survivors = {u.id: u for u in m0}
    for u in m1:
        orig = survivors[u.id]
        assert u.audio_path == orig.audio_path
        assert u.duration_s == orig.duration_s
        assert u.sample_rate == orig.sample_rate


def test_clean_all_idempotent_zero_second_delta():
    m1, first = clean_all(_dirty_manifest(), probe=lambda u: u.duration_s <= 0)
    m2, second = clean_all(m1, probe=lambda u: u.duration_s <= 0)
    assert not first.is_zero()
    assert m2 == m1
    assert second.is_zero()
    assert second.totals == PassCounts()


def test_report_additivity_matches_composed_run():
    m0 = _dirty_manifest()
    probe = lambda u: u.duration_s <= 0  # noqa: E731
    m, r1 = strip_newlines(m0)
    m, r2 = fix_separators(m, None)
    m, r3 = dedupe_transcripts(m)
    m, r4 = remove_empty(m, probe)
    composed_m, composed_r = clean_all(m0, None, probe)
    assert composed_m == m
    assert composed_r == r1 + r2 + r3 + r4


def test_global_counts_equal_speaker_sums():
    _, report = clean_all(_dirty_manifest(), probe=lambda u: u.duration_s <= 0)
    summed = PassCounts()
    for counts in report.per_speaker.values():
        summed = summed + counts
    assert summed == report.totals
