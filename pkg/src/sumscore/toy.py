"""Deterministic synthetic dataset for end-to-end runs.

Each input gets a few documents, ``n_references`` reference summaries built
from document sentences, and one peer summary per system. System ``s`` copies
the first reference and corrupts each token with probability proportional to
``s``, so system 0 is an exact copy and quality falls with the system index.
Optional human judgments follow the same ordering plus small seeded noise.
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

from sumscore.data import (
    Document,
    DocumentsField,
    EvalInstance,
    Reference,
    ReferencesField,
    SummarizerType,
    SummaryField,
)
from sumscore.errors import UsageError
from sumscore.io import ScoredRecord, write_instances, write_scores

JUDGMENT_NAME = "overall_responsiveness"
MAX_CORRUPTION = 0.6
JUDGMENT_NOISE = 0.05

_CONSONANTS = "bdfgklmnprstvz"
_VOWELS = "aeiou"


@dataclass(frozen=True)
class ToyDatasetSpec:
    seed: int = 7
    n_inputs: int = 5
    n_systems: int = 4
    n_references: int = 2
    vocabulary_size: int = 50
    with_judgments: bool = True

    def __post_init__(self):
        checks = [
            (self.n_inputs >= 1, "n_inputs must be >= 1"),
            (self.n_systems >= 2, "n_systems must be >= 2"),
            (self.n_references >= 2, "n_references must be >= 2"),
            (self.vocabulary_size >= 5, "vocabulary_size must be >= 5"),
        ]
        for ok, message in checks:
            if not ok:
                raise UsageError(message)

    @property
    def n_records(self) -> int:
        return self.n_inputs * (self.n_systems + self.n_references)


def corruption_level(system: int, n_systems: int) -> float:
    return MAX_CORRUPTION * system / (n_systems - 1)


def _vocabulary(rng: random.Random, size: int) -> List[str]:
    words: List[str] = []
    seen = set()
    while len(words) < size:
        n_syllables = rng.randint(2, 3)
        word = "".join(rng.choice(_CONSONANTS) + rng.choice(_VOWELS) for _ in range(n_syllables))
        if word not in seen:
            seen.add(word)
            words.append(word)
    return words


def _sentence(rng: random.Random, vocab: List[str]) -> List[str]:
    return [rng.choice(vocab) for _ in range(rng.randint(6, 10))]


def _corrupt(rng: random.Random, sentences: List[List[str]], level: float, vocab: List[str]) -> List[List[str]]:
    out = []
    for sentence in sentences:
        kept = []
        for token in sentence:
            u = rng.random()
            if u < level / 2:
                continue
            kept.append(rng.choice(vocab) if u < level else token)
        if kept:
            out.append(kept)
    if not out:
        out.append([rng.choice(vocab)])
    return out


def _join(sentences: List[List[str]]) -> Tuple[str, ...]:
    return tuple(" ".join(s) for s in sentences)


def generate_toy_dataset(spec: ToyDatasetSpec) -> Tuple[List[EvalInstance], List[ScoredRecord]]:
    """Return the instances and, when requested, the peer judgment records."""
    rng = random.Random(spec.seed)
    # Separate stream so the text does not depend on with_judgments.
    judge_rng = random.Random(f"judgments-{spec.seed}")
    vocab = _vocabulary(rng, spec.vocabulary_size)
    instances: List[EvalInstance] = []
    judgments: List[ScoredRecord] = []
    ref_names = [f"ref-{string.ascii_uppercase[i % 26]}{i // 26 or ''}" for i in range(spec.n_references)]

    for input_idx in range(spec.n_inputs):
        instance_id = f"input-{input_idx:03d}"
        doc_sentences = [[_sentence(rng, vocab) for _ in range(6)] for _ in range(2)]
        documents = DocumentsField(
            tuple(Document(f"doc-{d}", "\n".join(" ".join(s) for s in sents)) for d, sents in enumerate(doc_sentences))
        )
        pool = [s for sents in doc_sentences for s in sents]
        ref_sentences = [_corrupt(rng, rng.sample(pool, 3), 0.2, vocab) for _ in ref_names]
        references = ReferencesField(tuple(Reference(name, _join(s)) for name, s in zip(ref_names, ref_sentences)))
        base = {"references": references, "documents": documents}

        for system in range(spec.n_systems):
            level = corruption_level(system, spec.n_systems)
            summary = _join(_corrupt(rng, ref_sentences[0], level, vocab))
            summarizer_id = f"peer-{system}"
            instances.append(
                EvalInstance(instance_id, summarizer_id, SummarizerType.PEER, {"summary": SummaryField(summary), **base})
            )
            if spec.with_judgments:
                score = 5.0 * (1.0 - level) + judge_rng.uniform(-JUDGMENT_NOISE, JUDGMENT_NOISE)
                judgments.append(ScoredRecord(instance_id, summarizer_id, SummarizerType.PEER, {JUDGMENT_NAME: score}))
        for ref in references.references:
            instances.append(
                EvalInstance(
                    instance_id, ref.summarizer_id, SummarizerType.REFERENCE, {"summary": SummaryField(ref.text), **base}
                )
            )
    return instances, judgments


def write_toy_dataset(spec: ToyDatasetSpec, out_dir) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    instances, judgments = generate_toy_dataset(spec)
    paths = {"instances": out / "instances.jsonl"}
    write_instances(paths["instances"], instances)
    if spec.with_judgments:
        paths["judgments"] = out / "judgments.jsonl"
        write_scores(paths["judgments"], judgments)
    return {"paths": paths, "n_instances": len(instances), "n_judgments": len(judgments)}
