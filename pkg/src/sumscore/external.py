"""Run a metric implemented by an external command through a file protocol.

The wrapper writes the instances to ``{input}`` (one JSON record per line, the
same schema as instance files), runs the command template with ``{input}`` and
``{output}`` substituted, and reads one MetricsDict per line back from
``{output}``. Results are aligned with the input by line order.
"""

from __future__ import annotations

import json
import logging
import os
import shlex
import shutil
import signal
import subprocess
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from sumscore.data import EvalInstance, MetricsDict, check_metrics_dict
from sumscore.errors import ExternalMetricError, ExternalMetricTimeout, ProtocolError, SchemaError, UsageError
from sumscore.io import dump_line, instance_to_json
from sumscore.metric import Metric

logger = logging.getLogger(__name__)

_STDERR_TAIL = 2000


@dataclass(frozen=True)
class ExternalMetricConfig:
    command_template: str
    metric_name: str
    timeout: float = 600.0
    working_dir: Optional[str] = None
    required_fields: Tuple[str, ...] = ("summary", "references")

    def __post_init__(self):
        for placeholder in ("{input}", "{output}"):
            count = self.command_template.count(placeholder)
            if count != 1:
                raise UsageError(f"command template must contain {placeholder} exactly once, found {count}")
        if not self.metric_name:
            raise UsageError("external metric needs a name")
        if not self.timeout > 0:
            raise UsageError(f"timeout must be positive, got {self.timeout!r}")
        object.__setattr__(self, "required_fields", tuple(self.required_fields))

    @classmethod
    def from_json(cls, obj) -> "ExternalMetricConfig":
        if isinstance(obj, str):
            try:
                obj = json.loads(obj)
            except json.JSONDecodeError as e:
                raise UsageError(f"external metric config is not valid JSON: {e}") from None
        if not isinstance(obj, dict):
            raise UsageError("external metric config must be a JSON object")
        known = {"command_template", "metric_name", "timeout", "working_dir", "required_fields"}
        unknown = set(obj) - known
        if unknown:
            raise UsageError(f"unknown external metric config keys: {sorted(unknown)}")
        try:
            return cls(**obj)
        except TypeError as e:
            raise UsageError(f"invalid external metric config: {e}") from None


def _parse_output(path: Path, expected: int) -> List[MetricsDict]:
    if not path.exists():
        raise ProtocolError(f"external metric did not write its output file {path}")
    results = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                check_metrics_dict(record)
            except (json.JSONDecodeError, SchemaError) as e:
                raise ProtocolError(f"{path}: line {lineno}: malformed metrics record: {e}") from None
            results.append(record)
    if len(results) != expected:
        raise ProtocolError(f"external metric wrote {len(results)} records for {expected} inputs")
    return results


def _run_command(command: str, cfg: ExternalMetricConfig, workdir: Path) -> Tuple[int, str]:
    # Own process group, so a timeout also stops anything the shell started.
    proc = subprocess.Popen(
        command,
        shell=True,
        cwd=cfg.working_dir,
        stdout=subprocess.DEVNULL,
        stderr=subprocess.PIPE,
        text=True,
        start_new_session=True,
    )
    try:
        _, stderr = proc.communicate(timeout=cfg.timeout)
    except subprocess.TimeoutExpired:
        os.killpg(proc.pid, signal.SIGKILL)
        proc.communicate()
        raise ExternalMetricTimeout(
            f"external metric {cfg.metric_name!r} exceeded its {cfg.timeout}s timeout (scratch dir {workdir})"
        ) from None
    return proc.returncode, stderr


def run_external_metric(cfg: ExternalMetricConfig, instances: Sequence[EvalInstance]) -> List[MetricsDict]:
    """Score ``instances`` with one run of the external command.

    The scratch directory is deleted on success and kept for debugging when
    anything goes wrong.
    """
    workdir = Path(tempfile.mkdtemp(prefix=f"sumscore-{cfg.metric_name}-"))
    input_path = workdir / "input.jsonl"
    output_path = workdir / "output.jsonl"
    with open(input_path, "w", encoding="utf-8", newline="\n") as f:
        for instance in instances:
            f.write(dump_line(instance_to_json(instance)))
    command = cfg.command_template.replace("{input}", shlex.quote(str(input_path))).replace(
        "{output}", shlex.quote(str(output_path))
    )
    logger.debug("running external metric %s: %s", cfg.metric_name, command)
    try:
        returncode, stderr = _run_command(command, cfg, workdir)
        if returncode != 0:
            raise ExternalMetricError(
                f"external metric {cfg.metric_name!r} failed with exit code {returncode} "
                f"(scratch dir {workdir}); stderr: {stderr[-_STDERR_TAIL:].strip()}"
            )
        results = _parse_output(output_path, len(instances))
    except ExternalMetricError:
        logger.error("kept scratch directory %s for debugging", workdir)
        raise
    shutil.rmtree(workdir, ignore_errors=True)
    return results


class ExternalMetric(Metric):
    def __init__(self, cfg: ExternalMetricConfig):
        self.cfg = cfg
        self.name = cfg.metric_name
        self.required_fields = cfg.required_fields
        self._lock = threading.Lock()

    def score(self, instance: EvalInstance) -> MetricsDict:
        return self.score_batch([instance])[0]

    def score_batch(self, instances: Sequence[EvalInstance]) -> List[MetricsDict]:
        if not instances:
            return []
        with self._lock:
            return run_external_metric(self.cfg, instances)
