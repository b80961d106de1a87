"""Evaluation instances, fields, and MetricsDict operations."""

from __future__ import annotations

import enum
import math
import numbers
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from sumscore.errors import SchemaError, UsageError, ValidationError

# A summary is raw text or an ordered tuple of sentences.
SummaryText = Union[str, Tuple[str, ...]]

MetricsDict = Dict[str, Union[float, "MetricsDict"]]

FIELD_NAMES = ("summary", "references", "documents")


def as_summary_text(text) -> SummaryText:
    """Coerce a str or a sequence of sentence strings into a SummaryText."""
    if isinstance(text, str):
        return text
    if isinstance(text, (list, tuple)):
        sentences = tuple(text)
        for sentence in sentences:
            if not isinstance(sentence, str):
                raise ValidationError(f"sentence must be a string, got {type(sentence).__name__}")
            if sentence == "":
                raise ValidationError("sentence list contains an empty sentence")
        return sentences
    raise ValidationError(f"summary text must be a string or a list of strings, got {type(text).__name__}")


@dataclass(frozen=True)
class SummaryField:
    text: SummaryText

    def __post_init__(self):
        object.__setattr__(self, "text", as_summary_text(self.text))


@dataclass(frozen=True)
class Reference:
    summarizer_id: str
    text: SummaryText

    def __post_init__(self):
        object.__setattr__(self, "text", as_summary_text(self.text))


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str


@dataclass(frozen=True)
class ReferencesField:
    references: Tuple[Reference, ...]

    def __post_init__(self):
        refs = tuple(self.references)
        object.__setattr__(self, "references", refs)
        ids = [r.summarizer_id for r in refs]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate summarizer_id in references", field="references")

    def __len__(self) -> int:
        return len(self.references)

    @property
    def texts(self) -> List[SummaryText]:
        return [r.text for r in self.references]

    def index_of_or_none(self, summarizer_id: str) -> Optional[int]:
        for i, ref in enumerate(self.references):
            if ref.summarizer_id == summarizer_id:
                return i
        return None

    def index_of(self, summarizer_id: str) -> int:
        i = self.index_of_or_none(summarizer_id)
        if i is None:
            raise KeyError(summarizer_id)
        return i


@dataclass(frozen=True)
class DocumentsField:
    documents: Tuple[Document, ...]

    def __post_init__(self):
        docs = tuple(self.documents)
        object.__setattr__(self, "documents", docs)
        ids = [d.doc_id for d in docs]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate doc_id in documents", field="documents")


Field = Union[SummaryField, ReferencesField, DocumentsField]

FIELD_TYPES = {
    "summary": SummaryField,
    "references": ReferencesField,
    "documents": DocumentsField,
}


class SummarizerType(str, enum.Enum):
    PEER = "peer"
    REFERENCE = "reference"


@dataclass(frozen=True)
class EvalInstance:
    """One summary to evaluate plus the named fields a metric may need.

    Construction checks the per-instance invariants. Whether a reference's own
    summary appears in its references field is a dataset-level property checked
    by the readers, because jackknifing legitimately builds instances where it
    does not.
    """

    instance_id: str
    summarizer_id: str
    summarizer_type: SummarizerType
    fields: Mapping[str, Field] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "summarizer_type", SummarizerType(self.summarizer_type))
        for name in ("instance_id", "summarizer_id"):
            value = getattr(self, name)
            if not isinstance(value, str) or not value:
                raise ValidationError("must be a non-empty string", field=name)
        fields = dict(self.fields)
        for name, value in fields.items():
            if name not in FIELD_TYPES:
                raise ValidationError(f"unknown field name; expected one of {list(FIELD_NAMES)}", field=name)
            if not isinstance(value, FIELD_TYPES[name]):
                raise ValidationError(f"expected {FIELD_TYPES[name].__name__}, got {type(value).__name__}", field=name)
        if "summary" not in fields:
            raise ValidationError("the summary field is required", field="summary")
        object.__setattr__(self, "fields", fields)

    @property
    def summary(self) -> SummaryText:
        return self.fields["summary"].text

    @property
    def references(self) -> ReferencesField | None:
        return self.fields.get("references")

    def with_references(self, references: Sequence[Reference]) -> "EvalInstance":
        fields = dict(self.fields)
        fields["references"] = ReferencesField(tuple(references))
        return replace(self, fields=fields)


def check_metrics_dict(m, _path: str = "") -> None:
    """Raise SchemaError unless ``m`` is a valid MetricsDict."""
    if not isinstance(m, Mapping):
        raise SchemaError(f"{_path or 'metrics'}: expected a mapping, got {type(m).__name__}")
    for key, value in m.items():
        if not isinstance(key, str) or not key:
            raise SchemaError(f"{_path or 'metrics'}: keys must be non-empty strings, got {key!r}")
        if "/" in key:
            raise SchemaError(f"metric key {key!r} contains '/'")
        path = f"{_path}/{key}" if _path else key
        if isinstance(value, Mapping):
            if not value:
                # An empty group has no leaves and would vanish on flattening.
                raise SchemaError(f"{path}: nested metric group is empty")
            check_metrics_dict(value, path)
        elif isinstance(value, numbers.Real) and not isinstance(value, bool):
            if not math.isfinite(value):
                raise SchemaError(f"{path}: value {value!r} is not finite")
        else:
            raise SchemaError(f"{path}: expected a number or mapping, got {type(value).__name__}")


def flatten_metrics(m: MetricsDict) -> Dict[str, float]:
    """Flatten nested metrics into ``{"a/b": value}`` form.

    >>> flatten_metrics({"a": 1.0, "b": {"c": 2.0, "d": 3.0}})
    {'a': 1.0, 'b/c': 2.0, 'b/d': 3.0}
    """
    check_metrics_dict(m)
    flat: Dict[str, float] = {}

    def walk(node, prefix):
        for key, value in node.items():
            path = f"{prefix}/{key}" if prefix else key
            if isinstance(value, Mapping):
                walk(value, path)
            else:
                flat[path] = value

    walk(m, "")
    return flat


def unflatten_metrics(flat: Mapping[str, float]) -> MetricsDict:
    out: MetricsDict = {}
    for path, value in flat.items():
        keys = path.split("/")
        node = out
        for key in keys[:-1]:
            child = node.setdefault(key, {})
            if not isinstance(child, dict):
                raise SchemaError(f"path {path!r} conflicts with a leaf at {key!r}")
            node = child
        if keys[-1] in node:
            raise SchemaError(f"path {path!r} conflicts with an existing entry")
        node[keys[-1]] = value
    return out


def aggregate_macro(ms: Sequence[MetricsDict]) -> MetricsDict:
    """Leaf-wise arithmetic mean of MetricsDicts sharing the same key set."""
    if not ms:
        raise UsageError("cannot aggregate an empty list of metrics")
    flats = [flatten_metrics(m) for m in ms]
    keys = set(flats[0])
    for flat in flats[1:]:
        if set(flat) != keys:
            offending = sorted(keys.symmetric_difference(flat))[0]
            raise SchemaError(f"metric key sets differ at path {offending!r}")
    n = len(flats)
    mean = {path: math.fsum(f[path] for f in flats) / n for path in flats[0]}
    return unflatten_metrics(mean)


def suffix_metric_names(m: MetricsDict, suffix: str) -> MetricsDict:
    if not suffix:
        raise UsageError("suffix must be non-empty")
    out: MetricsDict = {}
    for key, value in m.items():
        new_key = key + suffix
        if new_key in out or (new_key in m and new_key != key):
            raise SchemaError(f"renaming {key!r} to {new_key!r} collides with an existing key")
        out[new_key] = value
    return out


def merge_metrics(*ms: MetricsDict) -> MetricsDict:
    """Union of top-level keys; a repeated key is a SchemaError."""
    out: MetricsDict = {}
    for m in ms:
        for key, value in m.items():
            if key in out:
                raise SchemaError(f"metric {key!r} appears twice")
            out[key] = value
    return out
