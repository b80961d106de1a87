import json
import shlex
import sys

import pytest

from conftest import STUBS_DIR
from sumscore.cli import (
    RESERVED_FLAGS,
    _metric_flags,
    build_subcommands,
    main,
    parse_param,
)
from sumscore.data import aggregate_macro, flatten_metrics
from sumscore.errors import RegistryError, UsageError
from sumscore.io import ScoredRecord, read_instances, read_scores, write_instances, write_scores
from sumscore.metric import Metric, MetricDescriptor, ParamSpec
from sumscore.registry import MetricRegistry, build_registry


def subcommands(parser, name):
    action = next(a for a in parser._subparsers._group_actions if a.dest == "command")
    sub = action.choices[name]
    inner = [a for a in sub._actions if getattr(a, "choices", None) and a.dest == "metric"]
    return sorted(inner[0].choices) if inner else []


def external_flag(name="ext", script="constant_metric.py"):
    cmd = " ".join(shlex.quote(p) for p in (sys.executable, str(STUBS_DIR / script))) + " {input} {output}"
    return ["--external-metric", json.dumps({"metric_name": name, "command_template": cmd})]


@pytest.fixture
def toy(tmp_path):
    assert main(["setup-dataset", "toy", str(tmp_path / "toy")]) == 0
    return tmp_path / "toy"


@pytest.mark.parametrize(
    "raw, kind, value",
    [("4", "int", 4), ("[1,2,3]", "json", [1, 2, 3]), ("true", "bool", True), ("off", "bool", False),
     ("0.5", "float", 0.5), ("best", "string", "best"), ('{"a": 1}', "json", {"a": 1})],
)
def test_parse_param(raw, kind, value):
    assert parse_param(raw, ParamSpec("x", kind)) == value


@pytest.mark.parametrize("raw, kind", [("abc", "int"), ("maybe", "bool"), ("nan", "float"), ("[1,", "json")])
def test_parse_param_errors(raw, kind):
    with pytest.raises(UsageError) as info:
        parse_param(raw, ParamSpec("my_param", kind))
    assert "--my-param" in str(info.value) and kind in str(info.value) and raw in str(info.value)


def test_generated_subcommands():
    parser = build_subcommands(build_registry())
    assert subcommands(parser, "evaluate") == ["rouge"]
    assert subcommands(parser, "score") == ["rouge"]
    empty = build_subcommands(MetricRegistry())
    assert subcommands(empty, "evaluate") == subcommands(empty, "score") == []
    two = build_registry()
    two.register(MetricDescriptor("other", ("summary",)), Metric)
    parser = build_subcommands(two)
    assert len(subcommands(parser, "evaluate")) + len(subcommands(parser, "score")) == 4


def test_one_flag_per_param():
    entry = build_registry().lookup("rouge")
    flags = _metric_flags(entry)
    assert len(flags) == len(entry.descriptor.params) == len(set(flags))
    assert "--ngram-orders" in flags and not set(flags) & RESERVED_FLAGS


def test_flag_collision_is_startup_error():
    registry = MetricRegistry()
    registry.register(MetricDescriptor("bad", ("summary",), (ParamSpec("input", "string"),)), Metric)
    with pytest.raises(RegistryError, match="--input"):
        build_subcommands(registry)
    registry = MetricRegistry()
    registry.register(MetricDescriptor("bad", ("summary",), (ParamSpec("a_b", "int"), ParamSpec("a-b", "int"))), Metric)
    with pytest.raises(RegistryError):
        build_subcommands(registry)


def test_evaluate_macro_is_mean_of_micro(toy, tmp_path):
    peers = [i for i in read_instances(toy / "instances.jsonl") if i.summarizer_id == "peer-2"]
    write_instances(tmp_path / "one.jsonl", peers)
    argv = ["evaluate", "rouge", "--input", str(tmp_path / "one.jsonl"),
            "--macro-output", str(tmp_path / "macro.json"), "--micro-output", str(tmp_path / "micro.jsonl")]
    assert main(argv) == 0
    micro = read_scores(tmp_path / "micro.jsonl")
    macro = json.loads((tmp_path / "macro.json").read_text())
    assert len(micro) == len(peers)
    assert macro["summarizer_id"] == "peer-2"
    assert macro["metrics"] == aggregate_macro([r.metrics for r in micro])
    f1s = [r.metrics["rouge-1"]["f1"] for r in micro]
    assert macro["metrics"]["rouge-1"]["f1"] == pytest.approx(sum(f1s) / len(f1s), abs=1e-12)


def test_evaluate_perfect_copy(toy, tmp_path):
    peers = [i for i in read_instances(toy / "instances.jsonl") if i.summarizer_id == "peer-0"]
    peers = [i.with_references(i.references.references[:1]) for i in peers]
    write_instances(tmp_path / "copy.jsonl", peers)
    argv = ["evaluate", "rouge", "--input", str(tmp_path / "copy.jsonl"),
            "--macro-output", str(tmp_path / "m.json"), "--micro-output", str(tmp_path / "u.jsonl")]
    assert main(argv) == 0
    assert json.loads((tmp_path / "m.json").read_text())["metrics"]["rouge-1"]["f1"] == 1.0


def test_evaluate_rejects_mixed_systems(toy, tmp_path, capsys):
    argv = ["evaluate", "rouge", "--input", str(toy / "instances.jsonl"),
            "--macro-output", str(tmp_path / "m.json"), "--micro-output", str(tmp_path / "u.jsonl")]
    assert main(argv) == 1
    assert "evaluate expects one system; use score" in capsys.readouterr().err
    assert not (tmp_path / "m.json").exists()


def test_score_with_and_without_jackknifing(toy, tmp_path):
    out = tmp_path / "scores.jsonl"
    assert main(["score", "rouge", "--input", str(toy / "instances.jsonl"), "--output", str(out)]) == 0
    records = read_scores(out)
    assert len(records) == 5 * 6
    for r in records:
        paths = flatten_metrics(r.metrics)
        if r.summarizer_type.value == "peer":
            assert "rouge-1/f1" in paths and "rouge-1_jk/f1" in paths
        else:
            assert "rouge-1_jk/f1" in paths and not any(p.startswith("rouge-1/") for p in paths)
    assert main(["score", "rouge", "--input", str(toy / "instances.jsonl"), "--output", str(out),
                 "--disable-jackknifing"]) == 0
    for r in read_scores(out):
        if r.summarizer_type.value == "peer":
            assert not any("_jk" in k for k in r.metrics)


def test_score_metric_flags_are_applied(toy, tmp_path):
    out = tmp_path / "s.jsonl"
    argv = ["score", "rouge", "--input", str(toy / "instances.jsonl"), "--output", str(out),
            "--ngram-orders", "[3]", "--compute-rouge-l", "false", "--compute-su4", "true", "--beta", "2"]
    assert main(argv) == 0
    assert set(read_scores(out)[0].metrics) == {"rouge-3", "rouge-su4", "rouge-3_jk", "rouge-su4_jk"}
    assert main(argv[:-2] + ["--beta", "zero"]) == 1


def test_score_identical_references(tmp_path):
    from sumscore.data import EvalInstance, Reference, ReferencesField, SummaryField

    refs = ReferencesField((Reference("A", "the cat sat"), Reference("B", "the cat sat")))
    write_instances(tmp_path / "i.jsonl", [EvalInstance("i", "p", "peer", {"summary": SummaryField("a cat sat down"), "references": refs})])
    assert main(["score", "rouge", "--input", str(tmp_path / "i.jsonl"), "--output", str(tmp_path / "o.jsonl")]) == 0
    (record,) = read_scores(tmp_path / "o.jsonl")
    for key in ("rouge-1", "rouge-2", "rouge-l"):
        assert record.metrics[key] == pytest.approx(record.metrics[key + "_jk"], abs=1e-12)


def test_correlate_self_and_affine(tmp_path):
    records = []
    for s in range(4):
        for i in range(3):
            v = (s * 7 + i * 3) % 5 + s
            records.append(ScoredRecord(f"in{i}", f"s{s}", "peer", {"m": float(v), "t": 2.0 * v + 3}))
    write_scores(tmp_path / "s.jsonl", records)
    report_path = tmp_path / "r.json"
    assert main(["correlate", "--input", str(tmp_path / "s.jsonl"), "--metric-a", "m", "--metric-b", "m",
                 "--output", str(report_path)]) == 0
    report = json.loads(report_path.read_text())
    for level in ("summary", "system", "global"):
        for coef in ("pearson", "spearman", "kendall"):
            assert report[level][coef] == pytest.approx(1.0)
    assert main(["correlate", "--input", str(tmp_path / "s.jsonl"), "--metric-a", "m", "--metric-b", "t",
                 "--level", "global", "--output", str(report_path)]) == 0
    report = json.loads(report_path.read_text())
    assert set(report) == {"metric_a", "metric_b", "global"}
    assert report["global"]["pearson"] == pytest.approx(1.0, abs=1e-12)


def test_correlate_two_files_and_errors(tmp_path, capsys):
    a = [ScoredRecord("i", f"s{k}", "peer", {"m": float(k)}) for k in range(3)]
    b = [ScoredRecord("i", f"s{k}", "peer", {"h": float(k * k)}) for k in range(3)]
    write_scores(tmp_path / "a.jsonl", a)
    write_scores(tmp_path / "b.jsonl", b)
    out = tmp_path / "r.json"
    assert main(["correlate", "--input", str(tmp_path / "a.jsonl"), str(tmp_path / "b.jsonl"),
                 "--metric-a", "m", "--metric-b", "h", "--output", str(out)]) == 0
    assert json.loads(out.read_text())["summary"]["spearman"] == pytest.approx(1.0)
    capsys.readouterr()
    assert main(["correlate", "--input", str(tmp_path / "a.jsonl"), "--metric-a", "m", "--metric-b", "zz",
                 "--output", str(out)]) == 2
    assert "available paths: m" in capsys.readouterr().err
    write_scores(tmp_path / "c.jsonl", [ScoredRecord("i", "s0", "peer", {"m": 9.0})])
    assert main(["correlate", "--input", str(tmp_path / "a.jsonl"), str(tmp_path / "c.jsonl"),
                 "--metric-a", "m", "--metric-b", "m", "--output", str(out)]) == 2


def test_correlate_undefined_level_reported(tmp_path):
    write_scores(tmp_path / "s.jsonl", [ScoredRecord("i", "a", "peer", {"m": 1.0, "h": 2.0})])
    out = tmp_path / "r.json"
    assert main(["correlate", "--input", str(tmp_path / "s.jsonl"), "--metric-a", "m", "--metric-b", "h",
                 "--output", str(out)]) == 0
    report = json.loads(out.read_text())
    for level in ("summary", "system", "global"):
        assert report[level]["pearson"] is None and report[level]["reason"]


def test_setup_dataset(tmp_path, capsys):
    for name in ("a", "b"):
        assert main(["setup-dataset", "toy", str(tmp_path / name), "--seed", "7"]) == 0
    for f in ("instances.jsonl", "judgments.jsonl"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    assert len((tmp_path / "a" / "instances.jsonl").read_text().splitlines()) == 5 * (4 + 2)
    assert main(["setup-dataset", "toy", str(tmp_path / "c"), "--n-inputs", "2", "--n-systems", "3",
                 "--no-judgments"]) == 0
    assert not (tmp_path / "c" / "judgments.jsonl").exists()
    assert len((tmp_path / "c" / "instances.jsonl").read_text().splitlines()) == 10
    capsys.readouterr()
    assert main(["setup-dataset", "duc2004", str(tmp_path / "d")]) == 1
    assert "toy" in capsys.readouterr().err


def test_list_metrics(capsys):
    assert main(["list-metrics"]) == 0
    first = capsys.readouterr().out
    assert first.startswith("rouge\n")
    assert "required fields: summary, references" in first
    assert "--ngram-orders" in first
    assert main(["list-metrics"]) == 0
    assert capsys.readouterr().out == first
    assert main(external_flag("aaa-ext") + ["list-metrics"]) == 0
    out = capsys.readouterr().out
    names = [line for line in out.splitlines() if line and not line.startswith(" ")]
    assert names == ["aaa-ext", "rouge"]


def test_external_metric_through_cli(toy, tmp_path, capsys):
    out = tmp_path / "ext.jsonl"
    assert main(external_flag() + ["score", "ext", "--input", str(toy / "instances.jsonl"), "--output", str(out)]) == 0
    records = read_scores(out)
    assert all(flatten_metrics(r.metrics).get("ext_jk") == 0.5 for r in records)
    assert main(external_flag("trunc", "truncating_metric.py")
                + ["score", "trunc", "--input", str(toy / "instances.jsonl"), "--output", str(out)]) == 3
    assert main(external_flag("fail", "failing_metric.py")
                + ["score", "fail", "--input", str(toy / "instances.jsonl"), "--output", str(out)]) == 3


def test_setup_metric(resource_home, tmp_path):
    assert main(["setup-metric", "rouge"]) == 0
    assert (resource_home / "rouge" / "stopwords.txt").exists()
    src = tmp_path / "s.txt"
    src.write_text("x\n")
    assert main(["setup-metric", "rouge", "--source", str(src), "--sha256", "0" * 64]) == 2
    assert main(["setup-metric", "bleu"]) == 1


@pytest.mark.parametrize(
    "argv, code",
    [
        ([], 1),
        (["score"], 1),
        (["score", "bleu", "--input", "x", "--output", "y"], 1),
        (["score", "rouge", "--input", "/nonexistent/file.jsonl", "--output", "y"], 2),
        (["--external-metric", "{bad", "list-metrics"], 1),
        (["--external-metric", '{"metric_name": "rouge", "command_template": "t {input} {output}"}', "list-metrics"], 1),
    ],
)
def test_exit_codes(argv, code, capsys):
    assert main(argv) == code
    assert capsys.readouterr().out == ""


def test_validation_failure_exit_code(tmp_path, capsys):
    (tmp_path / "i.jsonl").write_text('{"instance_id": "a", "summarizer_id": "s", "summarizer_type": "peer"}\n')
    assert main(["score", "rouge", "--input", str(tmp_path / "i.jsonl"), "--output", str(tmp_path / "o")]) == 2
    assert "line 1" in capsys.readouterr().err
    (tmp_path / "j.jsonl").write_text('{"instance_id": "a", "summarizer_id": "s", "summarizer_type": "peer", "summary": {"text": "x"}}\n')
    assert main(["score", "rouge", "--input", str(tmp_path / "j.jsonl"), "--output", str(tmp_path / "o")]) == 2
    assert "references" in capsys.readouterr().err


def test_unwritable_output_is_data_error(toy, tmp_path):
    argv = ["score", "rouge", "--input", str(toy / "instances.jsonl"), "--output", str(tmp_path / "no" / "dir" / "o.jsonl")]
    assert main(argv) == 2


def test_module_entry_point(tmp_path):
    import subprocess

    proc = subprocess.run([sys.executable, "-m", "sumscore", "list-metrics"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("rouge")
