"""Summarization evaluation toolkit: native ROUGE, jackknifed scoring, and
correlation of metrics with human judgments."""

from sumscore.data import (
    Document,
    DocumentsField,
    EvalInstance,
    Reference,
    ReferencesField,
    SummarizerType,
    SummaryField,
    aggregate_macro,
    flatten_metrics,
    suffix_metric_names,
    unflatten_metrics,
)
from sumscore.metric import Metric, MetricDescriptor, ParamKind, ParamSpec, score_all, validate_fields
from sumscore.registry import MetricRegistry, build_registry
from sumscore.rouge import Rouge

__version__ = "0.1.0"

__all__ = [
    "Document",
    "DocumentsField",
    "EvalInstance",
    "Metric",
    "MetricDescriptor",
    "MetricRegistry",
    "ParamKind",
    "ParamSpec",
    "Reference",
    "ReferencesField",
    "Rouge",
    "SummarizerType",
    "SummaryField",
    "aggregate_macro",
    "build_registry",
    "flatten_metrics",
    "score_all",
    "suffix_metric_names",
    "unflatten_metrics",
    "validate_fields",
]
