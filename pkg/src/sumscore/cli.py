"""Command-line entry point.

``evaluate`` and ``score`` get one generated subcommand per registered metric,
with one flag per declared metric parameter. Complex parameter values are
passed as JSON strings. Diagnostics go to stderr; result files are the only
data output. Exit codes: 0 success, 1 usage error, 2 data error, 3 external
metric or protocol error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from sumscore.correlation import LEVELS, correlate
from sumscore.data import SummarizerType, aggregate_macro
from sumscore.errors import RegistryError, SumScoreError, UsageError
from sumscore.external import ExternalMetricConfig
from sumscore.io import (
    ScoredRecord,
    build_score_table,
    dump_line,
    merge_score_records,
    read_instances,
    read_scores,
    write_scores,
)
from sumscore.jackknife import score_with_jackknifing
from sumscore.metric import ParamKind, ParamSpec, score_all
from sumscore.registry import MetricRegistry, RegistryEntry, build_registry
from sumscore.resources import install_stopwords
from sumscore.toy import ToyDatasetSpec, write_toy_dataset

logger = logging.getLogger("sumscore")

RESERVED_FLAGS = frozenset(
    {
        "--input",
        "--output",
        "--macro-output",
        "--micro-output",
        "--silent",
        "--disable-jackknifing",
        "--external-metric",
        "--help",
    }
)

DATASETS = ("toy",)
SETUP_METRICS = ("rouge",)

_TRUE = {"true", "1", "yes", "y", "on"}
_FALSE = {"false", "0", "no", "n", "off"}


class ArgumentParser(argparse.ArgumentParser):
    """argparse that raises UsageError (exit code 1) instead of exiting with 2."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def flag_name(spec: ParamSpec) -> str:
    return "--" + spec.name.replace("_", "-")


def parse_param(raw: str, spec: ParamSpec) -> Any:
    def fail() -> UsageError:
        return UsageError(f"invalid value for {flag_name(spec)}: expected {spec.kind.value}, got {raw!r}")

    kind = spec.kind
    if kind is ParamKind.BOOL:
        lowered = raw.strip().lower()
        if lowered in _TRUE:
            return True
        if lowered in _FALSE:
            return False
        raise fail()
    if kind is ParamKind.INT:
        try:
            return int(raw)
        except ValueError:
            raise fail() from None
    if kind is ParamKind.FLOAT:
        try:
            value = float(raw)
        except ValueError:
            raise fail() from None
        if not math.isfinite(value):
            raise fail()
        return value
    if kind is ParamKind.STRING:
        return raw
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        raise fail() from None


def _metric_flags(entry: RegistryEntry) -> Dict[str, ParamSpec]:
    flags: Dict[str, ParamSpec] = {}
    for spec in entry.descriptor.params:
        flag = flag_name(spec)
        if flag in RESERVED_FLAGS:
            raise RegistryError(f"parameter {spec.name!r} of metric {entry.descriptor.name!r} collides with global flag {flag}")
        if flag in flags:
            raise RegistryError(f"metric {entry.descriptor.name!r} generates flag {flag} twice")
        flags[flag] = spec
    return flags


def _add_metric_flags(parser: argparse.ArgumentParser, entry: RegistryEntry) -> None:
    for flag, spec in _metric_flags(entry).items():
        default = "unset" if spec.default is None else json.dumps(spec.default)
        parser.add_argument(
            flag,
            dest=f"param__{spec.name}",
            metavar=spec.kind.value.upper(),
            default=None,
            help=f"{spec.help} ({spec.kind.value}, default: {default})",
        )


def _metric_params(args: argparse.Namespace, entry: RegistryEntry) -> Dict[str, Any]:
    params = {}
    for spec in entry.descriptor.params:
        raw = getattr(args, f"param__{spec.name}", None)
        if raw is not None:
            params[spec.name] = parse_param(raw, spec)
    return params


def build_subcommands(registry: MetricRegistry) -> ArgumentParser:
    parser = ArgumentParser(prog="sumscore", description="Evaluate summarization systems and metrics.")
    parser.add_argument("--silent", action="store_true", help="only log errors")
    parser.add_argument(
        "--external-metric",
        action="append",
        default=[],
        metavar="JSON",
        help='register an external metric, e.g. \'{"metric_name": "x", "command_template": "tool {input} {output}"}\'',
    )
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    evaluate = commands.add_parser("evaluate", help="score one system's summaries; writes summary- and system-level output")
    eval_metrics = evaluate.add_subparsers(dest="metric", metavar="METRIC")
    eval_metrics.required = True
    score = commands.add_parser("score", help="score many systems and references, with jackknifing")
    score_metrics = score.add_subparsers(dest="metric", metavar="METRIC")
    score_metrics.required = True

    for entry in registry.entries():
        name = entry.descriptor.name
        sub = eval_metrics.add_parser(name, help=f"evaluate with {name}")
        sub.add_argument("--input", required=True, help="instances file")
        sub.add_argument("--macro-output", required=True, help="system-level JSON output")
        sub.add_argument("--micro-output", required=True, help="summary-level JSONL output")
        _add_metric_flags(sub, entry)
        sub.set_defaults(handler=cmd_evaluate, entry=entry)

        sub = score_metrics.add_parser(name, help=f"score with {name}")
        sub.add_argument("--input", required=True, help="instances file")
        sub.add_argument("--output", required=True, help="scores JSONL output")
        sub.add_argument("--disable-jackknifing", action="store_true", help="emit raw scores only for peers")
        _add_metric_flags(sub, entry)
        sub.set_defaults(handler=cmd_score, entry=entry)

    corr = commands.add_parser("correlate", help="correlate two metrics at summary, system and global level")
    corr.add_argument("--input", required=True, nargs="+", metavar="SCORES", help="one or two score files")
    corr.add_argument("--metric-a", required=True, help="flattened metric path, e.g. rouge-1_jk/f1")
    corr.add_argument("--metric-b", required=True, help="flattened metric path")
    corr.add_argument("--level", choices=sorted(LEVELS) + ["all"], default="all")
    corr.add_argument("--output", required=True, help="report JSON output")
    corr.set_defaults(handler=cmd_correlate)

    setup = commands.add_parser("setup-dataset", help="write a dataset in the common format")
    setup.add_argument("dataset", help=f"dataset name ({', '.join(DATASETS)})")
    setup.add_argument("output_dir")
    setup.add_argument("--seed", type=int, default=ToyDatasetSpec.seed)
    setup.add_argument("--n-inputs", type=int, default=ToyDatasetSpec.n_inputs)
    setup.add_argument("--n-systems", type=int, default=ToyDatasetSpec.n_systems)
    setup.add_argument("--n-references", type=int, default=ToyDatasetSpec.n_references)
    setup.add_argument("--vocabulary-size", type=int, default=ToyDatasetSpec.vocabulary_size)
    setup.add_argument("--no-judgments", action="store_true", help="skip the synthetic human judgments file")
    setup.set_defaults(handler=cmd_setup_dataset)

    setup_metric = commands.add_parser("setup-metric", help="install a metric's resources")
    setup_metric.add_argument("metric", help=f"metric name ({', '.join(SETUP_METRICS)})")
    setup_metric.add_argument("--source", help="stopword list URL or path (default: bundled list)")
    setup_metric.add_argument("--sha256", help="expected checksum of the source")
    setup_metric.set_defaults(handler=cmd_setup_metric)

    listing = commands.add_parser("list-metrics", help="list registered metrics")
    listing.set_defaults(handler=cmd_list_metrics)
    parser.set_defaults(registry=registry)
    return parser


# ---- commands --------------------------------------------------------------


def cmd_evaluate(args: argparse.Namespace) -> int:
    entry: RegistryEntry = args.entry
    metric = entry.create(**_metric_params(args, entry))
    instances = read_instances(args.input)
    if not instances:
        raise UsageError(f"{args.input} contains no instances")
    systems = sorted({i.summarizer_id for i in instances})
    if len(systems) > 1:
        raise UsageError(f"evaluate expects one system; use score (found {len(systems)}: {', '.join(systems[:5])})")
    if any(i.summarizer_type is not SummarizerType.PEER for i in instances):
        raise UsageError("evaluate expects peer summaries; use score for references")
    results = score_all(metric, instances)
    write_scores(
        args.micro_output,
        [ScoredRecord(i.instance_id, i.summarizer_id, i.summarizer_type, m) for i, m in zip(instances, results)],
    )
    macro = {"summarizer_id": systems[0], "metrics": aggregate_macro(results)}
    Path(args.macro_output).write_text(dump_line(macro), encoding="utf-8")
    logger.info("evaluated %d summaries of %s with %s", len(instances), systems[0], metric.name)
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    entry: RegistryEntry = args.entry
    metric = entry.create(**_metric_params(args, entry))
    instances = read_instances(args.input)
    results = score_with_jackknifing(metric, instances, disable=args.disable_jackknifing)
    write_scores(
        args.output,
        [ScoredRecord(i.instance_id, i.summarizer_id, i.summarizer_type, m) for i, m in zip(instances, results)],
    )
    logger.info("scored %d summaries with %s", len(instances), metric.name)
    return 0


def cmd_correlate(args: argparse.Namespace) -> int:
    if len(args.input) > 2:
        raise UsageError("correlate accepts one or two score files")
    records = read_scores(args.input[0])
    if len(args.input) == 2:
        records = merge_score_records(records, read_scores(args.input[1]))
    tx = build_score_table(records, args.metric_a)
    ty = build_score_table(records, args.metric_b)
    levels = sorted(LEVELS) if args.level == "all" else [args.level]
    levels = [lv for lv in ("summary", "system", "global") if lv in levels]
    report = correlate(tx, ty, levels).to_json()
    Path(args.output).write_text(json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    for level in levels:
        entry = report[level]
        values = ", ".join(
            f"{c}={entry[c]:.4f}" if entry[c] is not None else f"{c}=undefined" for c in ("pearson", "spearman", "kendall")
        )
        logger.info("%s-level: %s (n_used=%d)", level, values, entry["n_used"])
    return 0


def cmd_setup_dataset(args: argparse.Namespace) -> int:
    if args.dataset not in DATASETS:
        raise UsageError(f"unknown dataset {args.dataset!r}; known datasets: {', '.join(DATASETS)}")
    spec = ToyDatasetSpec(
        seed=args.seed,
        n_inputs=args.n_inputs,
        n_systems=args.n_systems,
        n_references=args.n_references,
        vocabulary_size=args.vocabulary_size,
        with_judgments=not args.no_judgments,
    )
    result = write_toy_dataset(spec, args.output_dir)
    print(f"wrote {result['n_instances']} instances to {result['paths']['instances']}", file=sys.stderr)
    if "judgments" in result["paths"]:
        print(f"wrote {result['n_judgments']} judgments to {result['paths']['judgments']}", file=sys.stderr)
    return 0


def cmd_setup_metric(args: argparse.Namespace) -> int:
    if args.metric not in SETUP_METRICS:
        raise UsageError(f"no setup available for {args.metric!r}; known: {', '.join(SETUP_METRICS)}")
    path = install_stopwords(args.source, args.sha256)
    print(f"installed stopword list at {path}", file=sys.stderr)
    return 0


def format_metric_listing(registry: MetricRegistry) -> str:
    lines = []
    for entry in registry.entries():
        d = entry.descriptor
        lines.append(d.name)
        lines.append(f"  required fields: {', '.join(d.required_fields)}")
        lines.append(f"  jackknifable: {'yes' if d.jackknifable else 'no'}")
        if d.params:
            lines.append("  flags:")
            for spec in d.params:
                default = "unset" if spec.default is None else json.dumps(spec.default)
                lines.append(f"    {flag_name(spec)} ({spec.kind.value}, default {default}): {spec.help}")
    return "\n".join(lines) + "\n"


def cmd_list_metrics(args: argparse.Namespace) -> int:
    sys.stdout.write(format_metric_listing(args.registry))
    return 0


# ---- main ------------------------------------------------------------------


def load_registry(argv: Sequence[str]) -> MetricRegistry:
    pre = ArgumentParser(add_help=False)
    pre.add_argument("--external-metric", action="append", default=[])
    known, _ = pre.parse_known_args(argv)
    return build_registry(ExternalMetricConfig.from_json(raw) for raw in known.external_metric)


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    saved = (logger.handlers[:], logger.propagate, logger.level)
    logger.handlers[:] = [handler]
    logger.propagate = False
    logger.setLevel(logging.ERROR if "--silent" in argv else logging.INFO)
    try:
        registry = load_registry(argv)
        parser = build_subcommands(registry)
        args = parser.parse_args(argv)
        return args.handler(args)
    except SumScoreError as e:
        logger.error("%s", e)
        return e.exit_code
    except OSError as e:
        # e.g. an output directory that does not exist
        logger.error("%s", e)
        return 2
    finally:
        logger.handlers[:], logger.propagate, logger.level = saved


if __name__ == "__main__":
    sys.exit(main())
