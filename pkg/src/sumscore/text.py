"""Tokenization, sentence handling, stemming and stopword filtering."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import FrozenSet, List, Optional

from sumscore.data import SummaryText
from sumscore.porter import porter_stem
from sumscore.resources import resolve_stopword_path

# Maximal runs of characters for which str.isalnum() holds.
_TOKEN_RE = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class TokenizerConfig:
    lowercase: bool = True
    stem: bool = False
    remove_stopwords: bool = False
    stopword_list_path: Optional[str] = None

    def __post_init__(self):
        if self.remove_stopwords:
            # Fail at configuration time rather than on the first summary.
            resolve_stopword_path(self.stopword_list_path)

    def stopwords(self) -> FrozenSet[str]:
        path = resolve_stopword_path(self.stopword_list_path)
        # mtime in the key so a reinstalled list is picked up.
        return _stopword_set(str(path), path.stat().st_mtime_ns, self.stem, self.lowercase)


DEFAULT_TOKENIZER = TokenizerConfig()


def load_stopwords(path) -> List[str]:
    """Read a one-token-per-line list, skipping blanks and '#' comments."""
    words = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.append(line)
    return words


@lru_cache(maxsize=None)
def _stopword_set(path: str, mtime_ns: int, stem: bool, lowercase: bool) -> FrozenSet[str]:
    words = load_stopwords(path)
    if lowercase:
        words = [w.lower() for w in words]
    if stem:
        words = [porter_stem(w) for w in words]
    return frozenset(words)


def normalize_tokenize(text: str, cfg: TokenizerConfig = DEFAULT_TOKENIZER) -> List[str]:
    """Split text into alphanumeric tokens.

    >>> normalize_tokenize("The cat's mat.")
    ['the', 'cat', 's', 'mat']
    """
    if cfg.lowercase:
        text = text.lower()
    tokens = _TOKEN_RE.findall(text)
    if cfg.stem:
        tokens = [porter_stem(t) for t in tokens]
    if cfg.remove_stopwords:
        stopwords = cfg.stopwords()
        tokens = [t for t in tokens if t not in stopwords]
    return tokens


def to_sentences(s: SummaryText) -> List[str]:
    if isinstance(s, str):
        return [line.strip() for line in s.split("\n") if line.strip()]
    return list(s)


def tokenize_sentences(s: SummaryText, cfg: TokenizerConfig = DEFAULT_TOKENIZER) -> List[List[str]]:
    """Tokens per sentence; sentences that yield no tokens are dropped."""
    out = []
    for sentence in to_sentences(s):
        tokens = normalize_tokenize(sentence, cfg)
        if tokens:
            out.append(tokens)
    return out
