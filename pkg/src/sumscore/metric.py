"""The Metric contract, parameter schemas, field validation and batch scoring."""

from __future__ import annotations

import enum
import json
import numbers
from dataclasses import dataclass
from typing import Any, ClassVar, List, Sequence, Tuple

from sumscore.data import FIELD_NAMES, FIELD_TYPES, EvalInstance, MetricsDict, check_metrics_dict
from sumscore.errors import RegistryError, SchemaError, ScoringError, SumScoreError, ValidationError


class ParamKind(str, enum.Enum):
    BOOL = "bool"
    INT = "int"
    FLOAT = "float"
    STRING = "string"
    JSON = "json"


def conforms(value: Any, kind: ParamKind) -> bool:
    if kind is ParamKind.BOOL:
        return isinstance(value, bool)
    if kind is ParamKind.INT:
        return isinstance(value, int) and not isinstance(value, bool)
    if kind is ParamKind.FLOAT:
        return isinstance(value, numbers.Real) and not isinstance(value, bool)
    if kind is ParamKind.STRING:
        return isinstance(value, str)
    try:
        json.dumps(value)
    except (TypeError, ValueError):
        return False
    return True


@dataclass(frozen=True)
class ParamSpec:
    """One constructor parameter of a metric. A ``default`` of None means unset."""

    name: str
    kind: ParamKind
    default: Any = None
    help: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", ParamKind(self.kind))
        if self.default is not None and not conforms(self.default, self.kind):
            raise RegistryError(f"default {self.default!r} of parameter {self.name!r} is not a {self.kind.value}")


@dataclass(frozen=True)
class MetricDescriptor:
    name: str
    required_fields: Tuple[str, ...]
    params: Tuple[ParamSpec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "required_fields", tuple(self.required_fields))
        object.__setattr__(self, "params", tuple(self.params))
        if not self.name or "/" in self.name:
            raise RegistryError(f"invalid metric name {self.name!r}")
        unknown = [f for f in self.required_fields if f not in FIELD_NAMES]
        if unknown:
            raise RegistryError(f"metric {self.name!r} requires unknown fields {unknown}")
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise RegistryError(f"metric {self.name!r} declares a parameter twice")

    @property
    def jackknifable(self) -> bool:
        return "references" in self.required_fields


class Metric:
    """Base class for metrics.

    Subclasses set ``name`` and ``required_fields`` and implement ``score``.
    Metrics that run more efficiently on batches (e.g. wrappers that start a
    subprocess) override ``score_batch`` instead.
    """

    name: ClassVar[str] = ""
    required_fields: ClassVar[Tuple[str, ...]] = ("summary",)
    params: ClassVar[Tuple[ParamSpec, ...]] = ()

    def score(self, instance: EvalInstance) -> MetricsDict:
        raise NotImplementedError

    def score_batch(self, instances: Sequence[EvalInstance]) -> List[MetricsDict]:
        results = []
        for instance in instances:
            try:
                results.append(self.score(instance))
            except SumScoreError:
                raise
            except Exception as e:
                raise ScoringError(f"{type(e).__name__}: {e}", instance_id=instance.instance_id) from e
        return results

    @classmethod
    def descriptor(cls) -> MetricDescriptor:
        return MetricDescriptor(cls.name, cls.required_fields, cls.params)


def validate_fields(descriptor: MetricDescriptor, instance: EvalInstance) -> None:
    for name in descriptor.required_fields:
        value = instance.fields.get(name)
        if value is None:
            raise ValidationError(
                f"metric {descriptor.name!r} requires field {name!r}, missing in instance "
                f"{instance.instance_id!r} (summarizer {instance.summarizer_id!r})",
                field=name,
            )
        if not isinstance(value, FIELD_TYPES[name]):
            raise ValidationError(
                f"instance {instance.instance_id!r}: expected {FIELD_TYPES[name].__name__}", field=name
            )


def check_metric_output(name: str, m: MetricsDict) -> None:
    check_metrics_dict(m)
    for key in m:
        if not key.startswith(name):
            raise SchemaError(f"output key {key!r} of metric {name!r} is not prefixed by the metric name")


def score_all(metric: Metric, instances: Sequence[EvalInstance]) -> List[MetricsDict]:
    """Validate, then score a batch; output is aligned with ``instances``."""
    descriptor = MetricDescriptor(metric.name, metric.required_fields, metric.params)
    for instance in instances:
        validate_fields(descriptor, instance)
    if not instances:
        return []
    results = metric.score_batch(list(instances))
    if len(results) != len(instances):
        raise ScoringError(f"metric {metric.name!r} returned {len(results)} results for {len(instances)} instances")
    for instance, result in zip(instances, results):
        try:
            check_metric_output(metric.name, result)
        except SchemaError as e:
            raise ScoringError(str(e), instance_id=instance.instance_id) from e
    return results
