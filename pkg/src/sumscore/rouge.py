"""Native ROUGE: ROUGE-N, summary-level ROUGE-L (union LCS) and ROUGE-SU."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Sequence, Set, Tuple

import numpy as np

from sumscore.data import EvalInstance, MetricsDict, SummaryText
from sumscore.errors import UsageError
from sumscore.metric import Metric, ParamKind, ParamSpec
from sumscore.text import DEFAULT_TOKENIZER, TokenizerConfig, tokenize_sentences

# Begin-of-sequence sentinel for ROUGE-SU. The tokenizer only emits
# alphanumeric tokens, so it cannot collide with a real token.
BOS = "<s>"

Tokens = Sequence[str]


class MultiRef(str, enum.Enum):
    AVERAGE = "average"
    BEST = "best"


@dataclass(frozen=True)
class PrfTriple:
    precision: float
    recall: float
    f1: float

    def as_dict(self) -> Dict[str, float]:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


@dataclass(frozen=True)
class RougeConfig:
    ngram_orders: Tuple[int, ...] = (1, 2)
    compute_rouge_l: bool = True
    compute_su4: bool = False
    skip_distance: int = 4
    multi_ref: MultiRef = MultiRef.AVERAGE
    beta: float = 1.0
    tokenizer: TokenizerConfig = DEFAULT_TOKENIZER

    def __post_init__(self):
        orders = self.ngram_orders
        if not isinstance(orders, (list, tuple)) or not all(
            isinstance(n, int) and not isinstance(n, bool) for n in orders
        ):
            raise UsageError(f"ngram_orders must be a list of integers, got {orders!r}")
        if any(n < 1 for n in orders):
            raise UsageError(f"ngram_orders must all be >= 1, got {list(orders)}")
        object.__setattr__(self, "ngram_orders", tuple(orders))
        if not isinstance(self.skip_distance, int) or self.skip_distance < 0:
            raise UsageError(f"skip_distance must be an integer >= 0, got {self.skip_distance!r}")
        if not self.beta > 0:
            raise UsageError(f"beta must be positive, got {self.beta!r}")
        try:
            object.__setattr__(self, "multi_ref", MultiRef(self.multi_ref))
        except ValueError:
            raise UsageError(f"multi_ref must be 'average' or 'best', got {self.multi_ref!r}") from None


def f_measure(p: float, r: float, beta: float = 1.0) -> float:
    b2 = beta * beta
    denom = r + b2 * p
    if denom == 0:
        return 0.0
    return (1 + b2) * p * r / denom


def _prf(matches: float, cand_total: int, ref_total: int, beta: float) -> PrfTriple:
    precision = matches / cand_total if cand_total else 0.0
    recall = matches / ref_total if ref_total else 0.0
    return PrfTriple(precision, recall, f_measure(precision, recall, beta))


def _overlap(a: Counter, b: Counter) -> int:
    if len(a) > len(b):
        a, b = b, a
    return sum(min(count, b[g]) for g, count in a.items() if g in b)


def combine(triples: Sequence[PrfTriple], policy: MultiRef) -> PrfTriple:
    """Average: component-wise mean. Best: maximal f1, first one on ties."""
    if not triples:
        raise UsageError("at least one reference is required")
    if MultiRef(policy) is MultiRef.BEST:
        best = triples[0]
        for t in triples[1:]:
            if t.f1 > best.f1:
                best = t
        return best
    n = len(triples)
    return PrfTriple(
        sum(t.precision for t in triples) / n,
        sum(t.recall for t in triples) / n,
        sum(t.f1 for t in triples) / n,
    )


# ---- ROUGE-N ---------------------------------------------------------------


def count_ngrams(tokens: Tokens, n: int) -> Counter:
    if n < 1:
        raise UsageError(f"n-gram order must be >= 1, got {n}")
    tokens = tuple(tokens)
    return Counter(tokens[i : i + n] for i in range(len(tokens) - n + 1))


def rouge_n_single(cand: Tokens, ref: Tokens, n: int, beta: float = 1.0) -> PrfTriple:
    cand_counts = count_ngrams(cand, n)
    ref_counts = count_ngrams(ref, n)
    matches = _overlap(cand_counts, ref_counts)
    return _prf(matches, sum(cand_counts.values()), sum(ref_counts.values()), beta)


def rouge_n(cand: Tokens, refs: Sequence[Tokens], n: int, cfg: RougeConfig = RougeConfig()) -> PrfTriple:
    if not refs:
        raise UsageError("ROUGE-N needs at least one reference")
    return combine([rouge_n_single(cand, ref, n, cfg.beta) for ref in refs], cfg.multi_ref)


# ---- ROUGE-L ---------------------------------------------------------------


class CandidateBatch:
    """Token sequences encoded once as a padded integer matrix.

    Column ``j`` holds candidate ``j``; padding is -1, which no query token
    maps to. Reusing one batch across many queries avoids re-encoding.
    """

    def __init__(self, sequences: Sequence[Tokens]):
        self.vocab: Dict[str, int] = {}
        width = max((len(s) for s in sequences), default=0)
        codes = np.full((width, len(sequences)), -1, dtype=np.int32)
        for j, seq in enumerate(sequences):
            for i, token in enumerate(seq):
                codes[i, j] = self.vocab.setdefault(token, len(self.vocab))
        self.codes = codes

    def __len__(self) -> int:
        return self.codes.shape[1]


def lcs_lengths(a: Tokens, candidates) -> np.ndarray:
    """LCS length of ``a`` against every candidate, as one vectorized DP.

    The DP row for ``a[:i]`` is kept for all candidates at once, indexed by
    candidate prefix length. Adding token ``x`` gives
    ``row'[j+1] = max(row'[j], row[j+1], row[j] + [b_j == x])``.
    """
    batch = candidates if isinstance(candidates, CandidateBatch) else CandidateBatch(candidates)
    width, n = batch.codes.shape
    # Row values never exceed the width, so a narrow dtype is safe and faster.
    dtype = np.uint8 if width < 256 else np.int32
    row = np.zeros((width + 1, n), dtype=dtype)
    masks: Dict[int, np.ndarray] = {}
    for token in a:
        code = batch.vocab.get(token)
        if code is None:
            continue  # matches nothing, row is unchanged
        match = masks.get(code)
        if match is None:
            match = masks[code] = (batch.codes == code).astype(dtype)
        best = np.maximum(row[1:], row[:-1] + match)
        nxt = np.zeros_like(row)
        for j in range(width):
            np.maximum(best[j], nxt[j], out=nxt[j + 1])
        row = nxt
    return row[width]


def lcs_len(a: Tokens, b: Tokens) -> int:
    return int(lcs_lengths(a, [b])[0])


def _lcs_ref_positions(ref: Tokens, cand: Tokens) -> List[int]:
    """Reference-side positions of one LCS, taking the earliest positions.

    ``suffix[i][j]`` is the LCS length of ``ref[i:]`` and ``cand[j:]``; walking
    forward from (0, 0) and skipping candidate tokens whenever that keeps the
    optimum yields the lexicographically smallest reference position list.
    """
    m, n = len(ref), len(cand)
    suffix = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m - 1, -1, -1):
        row, below = suffix[i], suffix[i + 1]
        r = ref[i]
        for j in range(n - 1, -1, -1):
            if r == cand[j]:
                row[j] = below[j + 1] + 1
            else:
                row[j] = max(below[j], row[j + 1])
    positions = []
    i = j = 0
    while i < m and j < n:
        if ref[i] == cand[j]:
            positions.append(i)
            i += 1
            j += 1
        elif suffix[i][j + 1] >= suffix[i + 1][j]:
            j += 1
        else:
            i += 1
    return positions


def union_lcs_match_positions(ref_sentence: Tokens, cand_sentences: Sequence[Tokens]) -> Set[int]:
    matched: Set[int] = set()
    for cand in cand_sentences:
        matched.update(_lcs_ref_positions(ref_sentence, cand))
    return matched


def _union_lcs_hits(cand_sents: Sequence[Tokens], ref_sents: Sequence[Tokens]) -> int:
    # Each matched unigram is credited at most as often as it occurs in both
    # the candidate and the reference.
    cand_counts = Counter(t for s in cand_sents for t in s)
    ref_counts = Counter(t for s in ref_sents for t in s)
    hits = 0
    for ref_sent in ref_sents:
        for pos in sorted(union_lcs_match_positions(ref_sent, cand_sents)):
            token = ref_sent[pos]
            if cand_counts[token] > 0 and ref_counts[token] > 0:
                cand_counts[token] -= 1
                ref_counts[token] -= 1
                hits += 1
    return hits


def rouge_l_sentences(
    cand_sents: Sequence[Tokens], ref_sents: Sequence[Tokens], beta: float = 1.0
) -> PrfTriple:
    hits = _union_lcs_hits(cand_sents, ref_sents)
    return _prf(hits, sum(map(len, cand_sents)), sum(map(len, ref_sents)), beta)


def rouge_l_summary(cand: SummaryText, refs: Sequence[SummaryText], cfg: RougeConfig = RougeConfig()) -> PrfTriple:
    if not refs:
        raise UsageError("ROUGE-L needs at least one reference")
    cand_sents = _tokenize(cand, cfg.tokenizer)
    triples = [rouge_l_sentences(cand_sents, _tokenize(ref, cfg.tokenizer), cfg.beta) for ref in refs]
    return combine(triples, cfg.multi_ref)


# ---- ROUGE-SU --------------------------------------------------------------


def skip_bigrams(tokens: Tokens, dmax: int) -> Counter:
    if dmax < 0:
        raise UsageError(f"skip distance must be >= 0, got {dmax}")
    tokens = tuple(tokens)
    pairs: Counter = Counter()
    for i, first in enumerate(tokens):
        for j in range(i + 1, min(len(tokens), i + dmax + 2)):
            pairs[(first, tokens[j])] += 1
    return pairs


def su_units(tokens: Tokens, dmax: int) -> Counter:
    """Skip bigrams plus one (BOS, token) pair per token, i.e. the unigrams."""
    units = skip_bigrams(tokens, dmax)
    units.update((BOS, t) for t in tokens)
    return units


def rouge_su_single(cand: Tokens, ref: Tokens, dmax: int, beta: float = 1.0) -> PrfTriple:
    cand_units = su_units(cand, dmax)
    ref_units = su_units(ref, dmax)
    return _prf(_overlap(cand_units, ref_units), sum(cand_units.values()), sum(ref_units.values()), beta)


def rouge_su(cand: Tokens, refs: Sequence[Tokens], cfg: RougeConfig = RougeConfig()) -> PrfTriple:
    if not refs:
        raise UsageError("ROUGE-SU needs at least one reference")
    return combine([rouge_su_single(cand, ref, cfg.skip_distance, cfg.beta) for ref in refs], cfg.multi_ref)


# ---- Metric ----------------------------------------------------------------


@lru_cache(maxsize=8192)
def _tokenize_cached(text: SummaryText, cfg: TokenizerConfig) -> Tuple[Tuple[str, ...], ...]:
    return tuple(tuple(s) for s in tokenize_sentences(text, cfg))


def _tokenize(text: SummaryText, cfg: TokenizerConfig) -> Tuple[Tuple[str, ...], ...]:
    return _tokenize_cached(text, cfg)


def _flat(sents) -> Tuple[str, ...]:
    return tuple(t for s in sents for t in s)


class Rouge(Metric):
    """ROUGE-N for each configured order, plus optional ROUGE-L and ROUGE-SU.

    N-grams and skip bigrams are counted over the concatenation of a summary's
    sentences; ROUGE-L is computed at the summary level over sentences.
    Output keys are ``rouge-<n>``, ``rouge-l`` and ``rouge-su<d>``, each
    holding precision, recall and f1.
    """

    name = "rouge"
    required_fields = ("summary", "references")
    params = (
        ParamSpec("ngram_orders", ParamKind.JSON, [1, 2], "JSON list of n-gram orders"),
        ParamSpec("compute_rouge_l", ParamKind.BOOL, True, "compute summary-level ROUGE-L"),
        ParamSpec("compute_su4", ParamKind.BOOL, False, "compute ROUGE-SU with the given skip distance"),
        ParamSpec("skip_distance", ParamKind.INT, 4, "maximum gap between skip-bigram tokens"),
        ParamSpec("multi_ref", ParamKind.STRING, "average", "multi-reference policy: average or best"),
        ParamSpec("beta", ParamKind.FLOAT, 1.0, "F-measure recall weight"),
        ParamSpec("lowercase", ParamKind.BOOL, True, "lowercase text before tokenizing"),
        ParamSpec("stem", ParamKind.BOOL, False, "apply the Porter stemmer"),
        ParamSpec("remove_stopwords", ParamKind.BOOL, False, "drop stopwords after stemming"),
        ParamSpec("stopword_list_path", ParamKind.STRING, None, "stopword list file (default: installed or bundled list)"),
    )

    def __init__(
        self,
        ngram_orders=(1, 2),
        compute_rouge_l: bool = True,
        compute_su4: bool = False,
        skip_distance: int = 4,
        multi_ref: str = "average",
        beta: float = 1.0,
        lowercase: bool = True,
        stem: bool = False,
        remove_stopwords: bool = False,
        stopword_list_path=None,
    ):
        tokenizer = TokenizerConfig(lowercase, stem, remove_stopwords, stopword_list_path)
        self.config = RougeConfig(
            ngram_orders=ngram_orders,
            compute_rouge_l=compute_rouge_l,
            compute_su4=compute_su4,
            skip_distance=skip_distance,
            multi_ref=multi_ref,
            beta=float(beta),
            tokenizer=tokenizer,
        )

    def score(self, instance: EvalInstance) -> MetricsDict:
        cfg = self.config
        refs = instance.references.texts
        if not refs:
            raise UsageError(f"instance {instance.instance_id!r} has no references")
        cand_sents = _tokenize(instance.summary, cfg.tokenizer)
        ref_sents = [_tokenize(r, cfg.tokenizer) for r in refs]
        cand = _flat(cand_sents)
        ref_flat = [_flat(s) for s in ref_sents]

        out: MetricsDict = {}
        for n in cfg.ngram_orders:
            out[f"rouge-{n}"] = rouge_n(cand, ref_flat, n, cfg).as_dict()
        if cfg.compute_rouge_l:
            triples = [rouge_l_sentences(cand_sents, r, cfg.beta) for r in ref_sents]
            out["rouge-l"] = combine(triples, cfg.multi_ref).as_dict()
        if cfg.compute_su4:
            out[f"rouge-su{cfg.skip_distance}"] = rouge_su(cand, ref_flat, cfg).as_dict()
        return out
