from __future__ import annotations

import random

import pytest

from corpusforge.errors import (
    DuplicateKeyError,
    EmptyMappingError,
    MissingHeaderError,
    NestedMarkerError,
    UnbalancedMarkerError,
    UnknownLanguageError,
    UnknownSymbolError,
)
from corpusforge.tokenizer import (
    UNKNOWN_TOKEN,
    WORD_BOUNDARY,
    PhonemeTable,
    load_table,
    tokenize,
    tokenize_code_switched,
)

from oracles import greedy_tokenize_oracle


def table(entries: dict[str, tuple[str, ...]], lang="xx") -> PhonemeTable:
    return PhonemeTable(lang, entries)


# --- load_table ---

def test_load_table_orders_longest_first(tmp_path):
    path = tmp_path / "t.tsv"
    path.write_text("#lang:en\na\ta\nsh\tʃ\n", encoding="utf-8")
    t = load_table(path)
    assert t.language == "en"
    assert list(t.entries) == ["sh", "a"]
    assert t.entries["sh"] == ("ʃ",)


def test_load_table_duplicate_key(tmp_path):
    path = tmp_path / "t.tsv"
    path.write_text("#lang:en\na\tx\na\ty\n", encoding="utf-8")
    with pytest.raises(DuplicateKeyError):
        load_table(path)


def test_load_table_missing_header(tmp_path):
    path = tmp_path / "t.tsv"
    path.write_text("a\tx\n", encoding="utf-8")
    with pytest.raises(MissingHeaderError):
        load_table(path)


def test_load_table_empty_token_list(tmp_path):
    path = tmp_path / "t.tsv"
    path.write_text("#lang:en\na\t\n", encoding="utf-8")
    with pytest.raises(EmptyMappingError):
        load_table(path)


def test_load_table_multi_token_entry(tmp_path):
    path = tmp_path / "t.tsv"
    path.write_text("#lang:en\nx\tk s\n", encoding="utf-8")
    assert load_table(path).entries["x"] == ("k", "s")


def test_fixture_tables_load(tables_dir):
    hi = load_table(tables_dir / "hi.tsv")
    en = load_table(tables_dir / "en.tsv")
    assert hi.language == "hi"
    assert en.language == "en"
    assert hi.entries["क्ष"] == ("k", "ʂ")


# --- tokenize ---

def test_longest_match_beats_shorter():
    t = table({"sh": ("ʃ",), "s": ("s",), "h": ("h",), "a": ("a",)})
    seq = tokenize("sha", t)
    assert seq.texts() == ["ʃ", "a"]


def test_empty_text_gives_empty_sequence():
    assert len(tokenize("", table({"a": ("a",)}))) == 0


def test_unknown_policy_unk_matches_char_oracle():
    t = table({"a": ("a",)})
    seq = tokenize("axa", t, unknown_policy="unk")
    assert seq.texts() == ["a", UNKNOWN_TOKEN, "a"]
    assert seq.texts() == greedy_tokenize_oracle("axa", t.entries)


def test_unknown_policy_error_names_scalar_and_offset():
    t = table({"a": ("a",)})
    with pytest.raises(UnknownSymbolError) as err:
        tokenize("aXa", t)
    assert err.value.symbol == "X"
    assert err.value.offset == 1


def test_unknown_policy_skip_drops_silently():
    t = table({"a": ("a",)})
    assert tokenize("axa", t, unknown_policy="skip").texts() == ["a", "a"]


def test_whitespace_emits_single_word_boundary():
    t = table({"a": ("a",), "b": ("b",)})
    assert tokenize("a b", t).texts() == ["a", WORD_BOUNDARY, "b"]
    assert tokenize("a   b", t).texts() == ["a", WORD_BOUNDARY, "b"]


def test_tokens_carry_source_language():
    t = table({"a": ("a",)}, lang="hi")
    assert tokenize("a", t).tokens == (("a", "hi"),)


def test_nfc_normalization_applied_before_matching():
    t = table({"é": ("e",)})
    assert tokenize("é", t).texts() == ["e"]


def test_greedy_matches_brute_force_oracle_on_random_texts():
    rng = random.Random(9)
    entries = {"a": ("A",), "ab": ("AB",), "ba": ("BA",), "b": ("B",), "abc": ("ABC",)}
    t = table(entries)
    for _ in range(500):
        text = "".join(rng.choice("abcx ") for _ in range(rng.randrange(0, 20)))
        expected = greedy_tokenize_oracle(text, entries)
        got = tokenize(text, t, unknown_policy="unk").texts()
        assert got == expected, text


def test_concatenation_at_match_boundary():
    t = table({"ab": ("X",), "c": ("C",)})
    a, b = "abc", "cab"
    joined = tokenize(a + b, t)
    assert joined.tokens == (tokenize(a, t) + tokenize(b, t)).tokens


# --- code switching ---

def _two_tables():
    en = table({"o": ("o",), "k": ("k",), "a": ("a",)}, lang="en")
    hi = table({"न": ("n",), "म": ("m",)}, lang="hi")
    return {"en": en, "hi": hi}


def test_code_switch_marked_segment_uses_marked_table():
    seq = tokenize_code_switched("[lang:en]ok[/lang]", _two_tables(), "hi")
    assert seq.tokens == (("o", "en"), ("k", "en"))


def test_code_switch_mixed_segments():
    seq = tokenize_code_switched("नम[lang:en]ok[/lang]म", _two_tables(), "hi")
    assert seq.tokens == (
        ("n", "hi"), ("m", "hi"), ("o", "en"), ("k", "en"), ("m", "hi"))


def test_code_switch_reduces_to_plain_tokenize():
    tables = _two_tables()
    text = "नमम नम"
    assert (tokenize_code_switched(text, tables, "hi").tokens
            == tokenize(text, tables["hi"]).tokens)


def test_code_switch_unbalanced_marker():
    with pytest.raises(UnbalancedMarkerError):
        tokenize_code_switched("[lang:en]a", _two_tables(), "hi")
    with pytest.raises(UnbalancedMarkerError):
        tokenize_code_switched("a[/lang]", _two_tables(), "hi")


def test_code_switch_nested_marker():
    with pytest.raises(NestedMarkerError):
        tokenize_code_switched("[lang:en]a[lang:hi]b[/lang][/lang]",
                               _two_tables(), "hi")


def test_code_switch_unknown_language():
    with pytest.raises(UnknownLanguageError):
        tokenize_code_switched("[lang:zz]a[/lang]", _two_tables(), "hi")
    with pytest.raises(UnknownLanguageError):
        tokenize_code_switched("a", _two_tables(), "zz")
