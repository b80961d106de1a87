import sys

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sumscore.resources import packaged_stopwords_path
from sumscore.text import (
    TokenizerConfig,
    _TOKEN_RE,
    load_stopwords,
    normalize_tokenize,
    to_sentences,
    tokenize_sentences,
)

STEM = TokenizerConfig(stem=True)
STOP = TokenizerConfig(remove_stopwords=True)
STEM_STOP = TokenizerConfig(stem=True, remove_stopwords=True)


@pytest.mark.parametrize(
    "text, tokens",
    [
        ("", []),
        ("The cat's mat.", ["the", "cat", "s", "mat"]),
        ("A-B 12", ["a", "b", "12"]),
        ("snake_case__x", ["snake", "case", "x"]),
        ("Ünïcode café naïve", ["ünïcode", "café", "naïve"]),
    ],
)
def test_tokenize_examples(text, tokens):
    assert normalize_tokenize(text) == tokens


def test_no_lowercase():
    assert normalize_tokenize("The Cat", TokenizerConfig(lowercase=False)) == ["The", "Cat"]


def test_token_class_matches_isalnum():
    # The tokenizer keeps exactly the codepoints str.isalnum() accepts.
    mismatches = [
        cp
        for cp in range(sys.maxunicode + 1)
        if not 0xD800 <= cp <= 0xDFFF and bool(_TOKEN_RE.fullmatch(chr(cp))) != chr(cp).isalnum()
    ]
    assert mismatches == []


@given(st.text())
def test_tokens_are_alphanumeric_lowercase(text):
    for token in normalize_tokenize(text):
        assert token and token.isalnum()
        assert token == token.lower()


@given(st.text())
def test_tokenize_idempotent(text):
    out = normalize_tokenize(text)
    assert normalize_tokenize(" ".join(out)) == out


@given(st.text(alphabet=st.sampled_from(list("the running of a cat is now Caresses, ran; at"))))
def test_stem_and_stopwords_never_add_tokens(text):
    base = len(normalize_tokenize(text))
    for cfg in (STEM, STOP, STEM_STOP):
        assert len(normalize_tokenize(text, cfg)) <= base


def test_stemming_and_stopwords():
    assert normalize_tokenize("Running caresses", STEM) == ["run", "caress"]
    assert normalize_tokenize("the cat is on the mat", STOP) == ["cat", "mat"]
    # Stopwords are stemmed too, so stemmed forms of stopwords are removed.
    assert {"this", "was"} <= set(load_stopwords(packaged_stopwords_path()))
    assert normalize_tokenize("this was running", STEM_STOP) == ["run"]


def test_custom_stopword_file(tmp_path):
    path = tmp_path / "stop.txt"
    path.write_text("# comment\n\nCats\nmat\n", encoding="utf-8")
    assert load_stopwords(path) == ["Cats", "mat"]
    cfg = TokenizerConfig(remove_stopwords=True, stopword_list_path=str(path))
    assert normalize_tokenize("the cats sat on the mat", cfg) == ["the", "sat", "on", "the"]
    stemmed = TokenizerConfig(stem=True, remove_stopwords=True, stopword_list_path=str(path))
    assert normalize_tokenize("the cat sat", stemmed) == ["the", "sat"]


def test_missing_stopword_list_fails_at_config(tmp_path):
    with pytest.raises(Exception, match="stop"):
        TokenizerConfig(remove_stopwords=True, stopword_list_path=str(tmp_path / "absent.txt"))


@pytest.mark.parametrize(
    "s, out",
    [
        (("a b", "c"), ["a b", "c"]),
        ("a b\nc\n", ["a b", "c"]),
        ("", []),
        ("  x  \n\n \n y", ["x", "y"]),
    ],
)
def test_to_sentences(s, out):
    assert to_sentences(s) == out


def test_tokenize_sentences_drops_empty():
    assert tokenize_sentences("a b\n...\nc") == [["a", "b"], ["c"]]
