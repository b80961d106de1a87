"""Line-delimited instance and score files.

Every line is one JSON object serialized with sorted keys, so writing the
same records twice yields byte-identical files. Errors report 1-based line
numbers.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from sumscore.correlation import ScoreTable
from sumscore.data import (
    Document,
    DocumentsField,
    EvalInstance,
    MetricsDict,
    Reference,
    ReferencesField,
    SummarizerType,
    SummaryField,
    SummaryText,
    check_metrics_dict,
    flatten_metrics,
    unflatten_metrics,
)
from sumscore.errors import DataError, ParseError, SchemaError, ValidationError

logger = logging.getLogger(__name__)

_INSTANCE_KEYS = {"instance_id", "summarizer_id", "summarizer_type", "summary", "references", "documents"}
_RECORD_KEYS = {"instance_id", "summarizer_id", "summarizer_type", "metrics"}


def dump_line(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False) + "\n"


def _iter_json_lines(path) -> Iterator[Tuple[int, Any]]:
    try:
        f = open(path, "rb")
    except OSError as e:
        raise DataError(f"cannot read {path}: {e.strerror}") from None
    with f:
        for lineno, raw in enumerate(f, 1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as e:
                raise ParseError(f"invalid UTF-8 at byte {e.start}", line=lineno) from None
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(f"invalid JSON: {e.msg} (column {e.colno})", line=lineno) from None
            if not isinstance(obj, dict):
                raise ParseError(f"expected a JSON object, got {type(obj).__name__}", line=lineno)
            yield lineno, obj


def _write_lines(path, objs) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for obj in objs:
            f.write(dump_line(obj))


# ---- instances -------------------------------------------------------------


def _text_to_json(text: SummaryText):
    return text if isinstance(text, str) else list(text)


def instance_to_json(instance: EvalInstance) -> Dict[str, Any]:
    obj: Dict[str, Any] = {
        "instance_id": instance.instance_id,
        "summarizer_id": instance.summarizer_id,
        "summarizer_type": instance.summarizer_type.value,
        "summary": {"text": _text_to_json(instance.summary)},
    }
    refs = instance.fields.get("references")
    if refs is not None:
        obj["references"] = [
            {"summarizer_id": r.summarizer_id, "text": _text_to_json(r.text)} for r in refs.references
        ]
    docs = instance.fields.get("documents")
    if docs is not None:
        obj["documents"] = [{"doc_id": d.doc_id, "text": d.text} for d in docs.documents]
    return obj


def _require(obj: Mapping, key: str, kind, field: str, line: Optional[int]):
    if key not in obj:
        raise ValidationError(f"missing key {key!r}", line=line, field=field)
    value = obj[key]
    if not isinstance(value, kind):
        raise ValidationError(f"key {key!r} has type {type(value).__name__}", line=line, field=field)
    return value


def instance_from_json(obj: Mapping[str, Any], line: Optional[int] = None) -> EvalInstance:
    unknown = set(obj) - _INSTANCE_KEYS
    if unknown:
        raise ValidationError(f"unknown keys {sorted(unknown)}", line=line, field=sorted(unknown)[0])
    for key in ("instance_id", "summarizer_id", "summarizer_type"):
        _require(obj, key, str, key, line)
    if "summary" not in obj:
        raise ValidationError("the summary field is required", line=line, field="summary")
    try:
        summarizer_type = SummarizerType(obj["summarizer_type"])
    except ValueError:
        raise ValidationError(
            f"summarizer_type must be 'peer' or 'reference', got {obj['summarizer_type']!r}",
            line=line,
            field="summarizer_type",
        ) from None

    try:
        fields: Dict[str, Any] = {}
        summary = _require(obj, "summary", dict, "summary", None)
        fields["summary"] = SummaryField(_require(summary, "text", (str, list), "summary", None))
        if "references" in obj:
            refs = []
            for item in _require(obj, "references", list, "references", None):
                if not isinstance(item, dict):
                    raise ValidationError("each reference must be an object", field="references")
                refs.append(
                    Reference(
                        _require(item, "summarizer_id", str, "references", None),
                        _require(item, "text", (str, list), "references", None),
                    )
                )
            fields["references"] = ReferencesField(tuple(refs))
        if "documents" in obj:
            docs = []
            for item in _require(obj, "documents", list, "documents", None):
                if not isinstance(item, dict):
                    raise ValidationError("each document must be an object", field="documents")
                docs.append(
                    Document(
                        _require(item, "doc_id", str, "documents", None),
                        _require(item, "text", str, "documents", None),
                    )
                )
            fields["documents"] = DocumentsField(tuple(docs))
        return EvalInstance(obj["instance_id"], obj["summarizer_id"], summarizer_type, fields)
    except ValidationError as e:
        raise ValidationError(e.message, line=line, field=e.field or "summary") from None


def validate_dataset(instances: Sequence[EvalInstance], lines: Optional[Sequence[int]] = None) -> None:
    """Dataset-level invariants: unique ids, references listed in their own field."""
    seen: Dict[Tuple[str, str], int] = {}
    for idx, instance in enumerate(instances):
        line = lines[idx] if lines is not None else None
        key = (instance.instance_id, instance.summarizer_id)
        if key in seen:
            where = f"line {seen[key]}" if lines is not None else f"position {seen[key]}"
            raise ValidationError(
                f"duplicate (instance_id, summarizer_id) {key}; first seen at {where}", line=line, field="summarizer_id"
            )
        seen[key] = line if lines is not None else idx
        refs = instance.fields.get("references")
        if instance.summarizer_type is SummarizerType.REFERENCE and refs is not None:
            try:
                own = refs.references[refs.index_of(instance.summarizer_id)]
            except KeyError:
                raise ValidationError(
                    f"reference summarizer {instance.summarizer_id!r} is missing from its own references field",
                    line=line,
                    field="references",
                ) from None
            if own.text != instance.summary:
                logger.warning(
                    "instance %r: reference %r summary differs from its entry in references",
                    instance.instance_id,
                    instance.summarizer_id,
                )


def read_instances(path) -> List[EvalInstance]:
    instances, lines = [], []
    for lineno, obj in _iter_json_lines(path):
        instances.append(instance_from_json(obj, lineno))
        lines.append(lineno)
    validate_dataset(instances, lines)
    return instances


def write_instances(path, instances: Sequence[EvalInstance]) -> None:
    _write_lines(path, (instance_to_json(i) for i in instances))


# ---- scores ----------------------------------------------------------------


@dataclass(frozen=True)
class ScoredRecord:
    instance_id: str
    summarizer_id: str
    summarizer_type: SummarizerType
    metrics: MetricsDict

    def __post_init__(self):
        object.__setattr__(self, "summarizer_type", SummarizerType(self.summarizer_type))
        for name in ("instance_id", "summarizer_id"):
            value = getattr(self, name)
            if not isinstance(value, str) or not value:
                raise ValidationError("must be a non-empty string", field=name)
        try:
            check_metrics_dict(self.metrics)
        except SchemaError as e:
            raise ValidationError(str(e), field="metrics") from None

    @property
    def key(self) -> Tuple[str, str]:
        return (self.instance_id, self.summarizer_id)

    def to_json(self) -> Dict[str, Any]:
        return {
            "instance_id": self.instance_id,
            "summarizer_id": self.summarizer_id,
            "summarizer_type": self.summarizer_type.value,
            "metrics": self.metrics,
        }


def record_from_json(obj: Mapping[str, Any], line: Optional[int] = None) -> ScoredRecord:
    unknown = set(obj) - _RECORD_KEYS
    if unknown:
        raise ValidationError(f"unknown keys {sorted(unknown)}", line=line, field=sorted(unknown)[0])
    for key in ("instance_id", "summarizer_id", "summarizer_type"):
        _require(obj, key, str, key, line)
    metrics = _require(obj, "metrics", dict, "metrics", line)
    try:
        return ScoredRecord(obj["instance_id"], obj["summarizer_id"], obj["summarizer_type"], metrics)
    except ValueError as e:
        field = getattr(e, "field", None) or "summarizer_type"
        raise ValidationError(getattr(e, "message", str(e)), line=line, field=field) from None


def read_scores(path) -> List[ScoredRecord]:
    records: List[ScoredRecord] = []
    seen: Dict[Tuple[str, str], int] = {}
    for lineno, obj in _iter_json_lines(path):
        record = record_from_json(obj, lineno)
        if record.key in seen:
            raise ValidationError(
                f"duplicate (instance_id, summarizer_id) {record.key}; first seen at line {seen[record.key]}",
                line=lineno,
                field="summarizer_id",
            )
        seen[record.key] = lineno
        records.append(record)
    return records


def write_scores(path, records: Sequence[ScoredRecord]) -> None:
    _write_lines(path, (r.to_json() for r in records))


def merge_score_records(first: Sequence[ScoredRecord], second: Sequence[ScoredRecord]) -> List[ScoredRecord]:
    """Merge two score lists on (instance_id, summarizer_id).

    Metrics are unioned by flattened path; the same path with different values
    is a DataError.
    """
    merged: Dict[Tuple[str, str], ScoredRecord] = {}
    for record in list(first) + list(second):
        existing = merged.get(record.key)
        if existing is None:
            merged[record.key] = record
            continue
        flat = flatten_metrics(existing.metrics)
        for path, value in flatten_metrics(record.metrics).items():
            if path in flat and flat[path] != value:
                raise DataError(f"conflicting values for {path!r} at {record.key}: {flat[path]!r} vs {value!r}")
            flat[path] = value
        try:
            metrics = unflatten_metrics(flat)
        except SchemaError as e:
            raise DataError(f"cannot merge metrics at {record.key}: {e}") from None
        merged[record.key] = ScoredRecord(record.instance_id, record.summarizer_id, existing.summarizer_type, metrics)
    return list(merged.values())


def available_paths(records: Sequence[ScoredRecord]) -> List[str]:
    paths = set()
    for record in records:
        paths.update(flatten_metrics(record.metrics))
    return sorted(paths)


def build_score_table(records: Sequence[ScoredRecord], metric_path: str) -> ScoreTable:
    values: Dict[Tuple[str, str], float] = {}
    missing = 0
    for record in records:
        flat = flatten_metrics(record.metrics)
        if metric_path in flat:
            values[(record.summarizer_id, record.instance_id)] = float(flat[metric_path])
        else:
            missing += 1
    if not values:
        raise DataError(
            f"metric path {metric_path!r} is not present in any record; available paths: "
            + ", ".join(available_paths(records))
        )
    return ScoreTable(metric_path, values, missing)
