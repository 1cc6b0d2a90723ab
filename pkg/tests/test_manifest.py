from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpusforge.errors import DuplicateIdError, MalformedLineError, MissingFieldError
from corpusforge.manifest import (
    TOTAL_ROW_ID,
    Manifest,
    SplitConfig,
    Utterance,
    compute_stats,
    load_manifest,
    render_stats_table,
    save_manifest,
    split_train_val,
    val_count,
)

from conftest import make_manifest, utt


def write_lines(path, records):
    path.write_text("\n".join(json.dumps(r, ensure_ascii=False) for r in records) + "\n",
                    encoding="utf-8")


def record(utt_id, **kw):
    base = {"id": utt_id, "speaker_id": "s1", "language": "hi",
            "audio_path": f"{utt_id}.wav", "transcript": "t",
            "duration_s": 1.0, "sample_rate": 16000}
    base.update(kw)
    return base


def test_load_sorts_shuffled_file_into_canonical_order(tmp_path):
    path = tmp_path / "m.jsonl"
    write_lines(path, [record("c"), record("a"), record("b")])
    m = load_manifest(path)
    assert m.ids() == ["a", "b", "c"]


def test_save_load_round_trip_is_identity(tmp_path):
    m = make_manifest(utt("a", transcript="नमस्ते।"), utt("b", transcript="x y"))
    path = tmp_path / "m.jsonl"
    save_manifest(m, path)
    assert load_manifest(path) == m


def test_non_ascii_transcript_survives_utf8_round_trip(tmp_path):
    m = make_manifest(utt("a", transcript="नमस्ते।"))
    path = tmp_path / "m.jsonl"
    save_manifest(m, path)
    assert "नमस्ते।" in path.read_text(encoding="utf-8")
    assert load_manifest(path).utterances[0].transcript == "नमस्ते।"


def test_missing_field_names_field_and_line(tmp_path):
    path = tmp_path / "m.jsonl"
    rec2 = record("b")
    del rec2["speaker_id"]
    write_lines(path, [record("a"), rec2, record("c")])
    with pytest.raises(MissingFieldError) as err:
        load_manifest(path)
    assert err.value.field == "speaker_id"
    assert err.value.line_no == 2


def test_duplicate_id_rejected(tmp_path):
    path = tmp_path / "m.jsonl"
    write_lines(path, [record("a"), record("a")])
    with pytest.raises(DuplicateIdError):
        load_manifest(path)


def test_malformed_json_line_rejected(tmp_path):
    path = tmp_path / "m.jsonl"
    path.write_text(json.dumps(record("a")) + "\n{not json\n", encoding="utf-8")
    with pytest.raises(MalformedLineError) as err:
        load_manifest(path)
    assert err.value.line_no == 2


def test_save_is_byte_deterministic(tmp_path):
    m = make_manifest(utt("a"), utt("b", transcript="नमस्ते|"))
    p1, p2 = tmp_path / "m1.jsonl", tmp_path / "m2.jsonl"
    save_manifest(m, p1)
    save_manifest(m, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_empty_manifest_round_trips(tmp_path):
    m = Manifest((), split="all", created_from="empty")
    path = tmp_path / "m.jsonl"
    save_manifest(m, path)
    loaded = load_manifest(path)
    assert len(loaded) == 0
    assert loaded == m


def test_manifest_rejects_out_of_order_construction():
    with pytest.raises(ValueError):
        Manifest((utt("b"), utt("a")))
    with pytest.raises(DuplicateIdError):
        Manifest((utt("a"), utt("a")))


_text = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",)), max_size=40)


@settings(max_examples=50, deadline=None)
@given(st.lists(
    st.tuples(_text.filter(bool), _text.filter(bool), _text),
    max_size=12, unique_by=lambda t: t[0]))
def test_round_trip_property(tmp_path_factory, entries):
    utts = [
        Utterance(id=f"u{i:03d}", speaker_id=spk, language="hi",
                  audio_path=path or "x.wav", transcript=text,
                  duration_s=0.5, sample_rate=22050)
        for i, (spk, path, text) in enumerate(entries)
    ]
    m = Manifest.from_utterances(utts, created_from="prop")
    path = tmp_path_factory.mktemp("rt") / "m.jsonl"
    save_manifest(m, path)
    assert load_manifest(path) == m


# --- stats ---

def test_stats_two_files_one_speaker():
    m = make_manifest(utt("a", duration=30.0), utt("b", duration=30.0))
    stats = compute_stats(m)
    assert len(stats) == 2  # speaker row + totals
    assert stats[0].file_count == 2
    assert f"{stats[0].hours:.2f}" == "0.02"
    assert stats[-1].speaker_id == TOTAL_ROW_ID


def test_stats_empty_manifest():
    stats = compute_stats(Manifest(()))
    assert len(stats) == 1
    assert stats[0].file_count == 0
    assert stats[0].hours == 0.0


def test_stats_totals_are_exact_sums():
    m = make_manifest(
        utt("a", speaker="s1", duration=123.456),
        utt("b", speaker="s1", duration=77.1),
        utt("c", speaker="s2", duration=9999.9),
    )
    stats = compute_stats(m)
    per_speaker = stats[:-1]
    assert stats[-1].file_count == sum(s.file_count for s in per_speaker)
    assert stats[-1].hours == sum(s.hours for s in per_speaker)


def test_stats_table_matches_row_shape():
    # row shape: "<speaker>  <files>  <hours to 2 decimals>"
    m = make_manifest(*[utt(f"u{i}", speaker="Hindi_Female", duration=40.28 * 3600 / 16512)
                        for i in range(3)])
    table = render_stats_table(compute_stats(m))
    lines = table.splitlines()
    assert lines[0].split() == ["speaker", "files", "hours"]
    cells = lines[1].split()
    assert cells[0] == "Hindi_Female"
    assert cells[1] == "3"
    assert len(cells[2].split(".")[1]) == 2


# --- splits ---

def test_split_100_files_fraction_001():
    m = make_manifest(*[utt(f"u{i:03d}") for i in range(100)])
    train, val = split_train_val(m, SplitConfig(val_fraction=0.01, seed=0))
    assert len(val) == 1
    assert len(train) == 99


def test_split_deterministic_for_fixed_seed():
    m = make_manifest(*[utt(f"u{i:03d}") for i in range(50)])
    cfg = SplitConfig(val_fraction=0.1, seed=7)
    first = split_train_val(m, cfg)
    second = split_train_val(m, cfg)
    assert first[0].ids() == second[0].ids()
    assert first[1].ids() == second[1].ids()


def test_split_different_seeds_differ_with_equal_sizes():
    m = make_manifest(*[utt(f"u{i:03d}", speaker=f"s{i % 4}") for i in range(200)])
    _, val0 = split_train_val(m, SplitConfig(val_fraction=0.05, seed=0))
    _, val1 = split_train_val(m, SplitConfig(val_fraction=0.05, seed=1))
    assert len(val0) == len(val1)
    assert set(val0.ids()) != set(val1.ids())


def test_split_partitions_disjoint_and_exhaustive_per_speaker():
    m = make_manifest(*[utt(f"u{i:03d}", speaker=f"s{i % 3}") for i in range(60)])
    train, val = split_train_val(m, SplitConfig(val_fraction=0.07, seed=3))
    assert set(train.ids()) | set(val.ids()) == set(m.ids())
    assert set(train.ids()) & set(val.ids()) == set()
    for speaker, utts in m.by_speaker().items():
        expected_val = val_count(len(utts), 0.07)
        got_val = sum(1 for u in val if u.speaker_id == speaker)
        assert got_val == expected_val


def test_split_singleton_speaker_stays_in_train():
    m = make_manifest(utt("a", speaker="solo"), *[utt(f"b{i}", speaker="s2") for i in range(9)])
    train, val = split_train_val(m, SplitConfig(val_fraction=0.5, seed=0))
    assert "a" in train.ids()
    assert all(u.speaker_id != "solo" for u in val)


def test_split_independent_of_input_order(tmp_path):
    # same utterances arriving via differently-ordered files pick the same val set
    recs = [record(f"u{i:02d}") for i in range(30)]
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_lines(p1, recs)
    write_lines(p2, list(reversed(recs)))
    cfg = SplitConfig(val_fraction=0.2, seed=5)
    val_a = split_train_val(load_manifest(p1), cfg)[1].ids()
    val_b = split_train_val(load_manifest(p2), cfg)[1].ids()
    assert val_a == val_b
