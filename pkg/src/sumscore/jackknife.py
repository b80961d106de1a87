"""Leave-one-out scoring over reference sets.

A peer with k references is scored against each of the k subsets that drop
one reference, and the results are averaged. A reference is scored once
against the other k - 1 references. Either way the summary is judged against
k - 1 references, so peer and reference scores are comparable. Jackknifed
metric names carry the ``_jk`` suffix.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

from sumscore.data import EvalInstance, MetricsDict, SummarizerType, aggregate_macro, merge_metrics, suffix_metric_names
from sumscore.errors import DataError, JackknifeNotPossible, UsageError
from sumscore.metric import Metric, MetricDescriptor, score_all

logger = logging.getLogger(__name__)

JK_SUFFIX = "_jk"


def leave_one_out(refs: Sequence) -> List[list]:
    refs = list(refs)
    if len(refs) < 2:
        raise UsageError(f"leave-one-out needs at least 2 items, got {len(refs)}")
    return [refs[:i] + refs[i + 1 :] for i in range(len(refs))]


@dataclass(frozen=True)
class JackknifePlan:
    enabled: bool
    k: int
    subsets: Tuple[Tuple[int, ...], ...] = field(default=())
    # Whether the raw (unjackknifed) score is produced as well.
    raw: bool = True


def _reference_count(instance: EvalInstance) -> int:
    refs = instance.fields.get("references")
    return len(refs) if refs is not None else 0


def _descriptor(metric: Metric) -> MetricDescriptor:
    return MetricDescriptor(metric.name, metric.required_fields, metric.params)


def _others(instance: EvalInstance) -> Tuple[int, ...]:
    """Indices of the references other than the instance's own summary."""
    k = _reference_count(instance)
    if k < 2:
        raise DataError(
            f"reference {instance.summarizer_id!r} of instance {instance.instance_id!r} has {k} references; "
            "at least 2 are needed to score a reference against the others"
        )
    own = instance.fields["references"].index_of_or_none(instance.summarizer_id)
    if own is None:
        raise DataError(
            f"reference {instance.summarizer_id!r} is missing from the references of {instance.instance_id!r}"
        )
    return tuple(i for i in range(k) if i != own)


def plan_for(instance: EvalInstance, descriptor: MetricDescriptor, *, disable: bool = False) -> JackknifePlan:
    k = _reference_count(instance)
    is_reference = instance.summarizer_type is SummarizerType.REFERENCE
    if not descriptor.jackknifable:
        if is_reference:
            logger.warning(
                "metric %r does not use references; scoring reference %r of %r without jackknifing",
                descriptor.name,
                instance.summarizer_id,
                instance.instance_id,
            )
        return JackknifePlan(False, k)
    if is_reference:
        return JackknifePlan(True, k, (_others(instance),), raw=False)
    if disable:
        return JackknifePlan(False, k)
    if k < 2:
        logger.warning(
            "instance %r has %d reference(s); jackknifing is not possible, emitting raw scores only",
            instance.instance_id,
            k,
        )
        return JackknifePlan(False, k)
    subsets = tuple(tuple(i for i in range(k) if i != drop) for drop in range(k))
    return JackknifePlan(True, k, subsets)


def plan_jackknife(
    instances: Sequence[EvalInstance], metric, *, disable: bool = False
) -> List[JackknifePlan]:
    descriptor = metric if isinstance(metric, MetricDescriptor) else _descriptor(metric)
    return [plan_for(instance, descriptor, disable=disable) for instance in instances]


def _subset_instance(instance: EvalInstance, subset: Sequence[int]) -> EvalInstance:
    refs = instance.fields["references"].references
    return instance.with_references([refs[i] for i in subset])


def _combine_subsets(results: Sequence[MetricsDict]) -> MetricsDict:
    return suffix_metric_names(aggregate_macro(results), JK_SUFFIX)


def jackknife_peer(metric: Metric, instance: EvalInstance) -> MetricsDict:
    """Mean over the k leave-one-out reference subsets, names suffixed ``_jk``."""
    if not _descriptor(metric).jackknifable:
        raise JackknifeNotPossible(f"metric {metric.name!r} does not use references")
    k = _reference_count(instance)
    if k < 2:
        raise JackknifeNotPossible(f"instance {instance.instance_id!r} has {k} reference(s); jackknifing needs 2")
    subsets = leave_one_out(range(k))
    results = score_all(metric, [_subset_instance(instance, s) for s in subsets])
    return _combine_subsets(results)


def jackknife_reference(metric: Metric, instance: EvalInstance) -> MetricsDict:
    """Score a reference against all of the other references."""
    if not _descriptor(metric).jackknifable:
        raise JackknifeNotPossible(f"metric {metric.name!r} does not use references")
    results = score_all(metric, [_subset_instance(instance, _others(instance))])
    return _combine_subsets(results)


def score_with_jackknifing(
    metric: Metric,
    instances: Sequence[EvalInstance],
    *,
    disable: bool = False,
) -> List[MetricsDict]:
    """Scores for a mixed peer/reference dataset, one MetricsDict per instance.

    Peers get raw scores plus ``_jk`` scores when jackknifing is possible;
    references get ``_jk`` scores only. All evaluations, including every
    reference subset, go to the metric as a single batch.
    """
    plans = plan_jackknife(instances, metric, disable=disable)
    batch: List[EvalInstance] = []
    slots: List[Tuple[int, str]] = []
    for idx, (instance, plan) in enumerate(zip(instances, plans)):
        if plan.raw:
            batch.append(instance)
            slots.append((idx, "raw"))
        if plan.enabled:
            for subset in plan.subsets:
                batch.append(_subset_instance(instance, subset))
                slots.append((idx, "jk"))
    results = score_all(metric, batch)

    raw: List[MetricsDict] = [{} for _ in instances]
    jk: List[List[MetricsDict]] = [[] for _ in instances]
    for (idx, kind), result in zip(slots, results):
        if kind == "raw":
            raw[idx] = result
        else:
            jk[idx].append(result)
    out = []
    for idx in range(len(instances)):
        parts = [raw[idx]]
        if jk[idx]:
            parts.append(_combine_subsets(jk[idx]))
        out.append(merge_metrics(*parts))
    return out
