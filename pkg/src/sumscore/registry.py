"""Registry of metric constructors keyed by metric name."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterable, List

from sumscore.errors import RegistryError, UsageError
from sumscore.external import ExternalMetric, ExternalMetricConfig
from sumscore.metric import Metric, MetricDescriptor, conforms
from sumscore.rouge import Rouge


@dataclass(frozen=True)
class RegistryEntry:
    descriptor: MetricDescriptor
    constructor: Callable[..., Metric]

    def create(self, **params: Any) -> Metric:
        """Build the metric, filling unspecified parameters with their defaults."""
        specs = {p.name: p for p in self.descriptor.params}
        unknown = set(params) - set(specs)
        if unknown:
            raise UsageError(f"metric {self.descriptor.name!r} has no parameters {sorted(unknown)}")
        kwargs = {}
        for name, spec in specs.items():
            value = params.get(name, spec.default)
            if value is None:
                continue
            if not conforms(value, spec.kind):
                raise UsageError(f"parameter {name!r} of {self.descriptor.name!r} expects a {spec.kind.value}, got {value!r}")
            kwargs[name] = value
        return self.constructor(**kwargs)


class MetricRegistry:
    def __init__(self):
        self._entries: Dict[str, RegistryEntry] = {}

    def register(self, descriptor: MetricDescriptor, constructor: Callable[..., Metric]) -> None:
        if descriptor.name in self._entries:
            raise RegistryError(f"metric {descriptor.name!r} is already registered")
        self._entries[descriptor.name] = RegistryEntry(descriptor, constructor)

    def lookup(self, name: str) -> RegistryEntry:
        try:
            return self._entries[name]
        except KeyError:
            available = ", ".join(self.names()) or "(none)"
            raise RegistryError(f"unknown metric {name!r}; available metrics: {available}") from None

    def names(self) -> List[str]:
        return sorted(self._entries)

    def entries(self) -> List[RegistryEntry]:
        return [self._entries[name] for name in self.names()]

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def __len__(self) -> int:
        return len(self._entries)


def register_external(registry: MetricRegistry, cfg: ExternalMetricConfig) -> None:
    descriptor = MetricDescriptor(cfg.metric_name, cfg.required_fields)
    registry.register(descriptor, lambda: ExternalMetric(cfg))


def build_registry(external: Iterable[ExternalMetricConfig] = ()) -> MetricRegistry:
    registry = MetricRegistry()
    registry.register(Rouge.descriptor(), Rouge)
    for cfg in external:
        register_external(registry, cfg)
    return registry
