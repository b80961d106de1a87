import pytest

from sumscore.correlation import spearman, system_level
from sumscore.data import SummarizerType
from sumscore.errors import UsageError
from sumscore.io import ScoredRecord, build_score_table, read_instances, read_scores
from sumscore.metric import score_all
from sumscore.rouge import Rouge
from sumscore.toy import JUDGMENT_NAME, ToyDatasetSpec, generate_toy_dataset, write_toy_dataset

ROUGE1 = Rouge(ngram_orders=[1], compute_rouge_l=False)


def test_deterministic_files(tmp_path):
    spec = ToyDatasetSpec(seed=3)
    write_toy_dataset(spec, tmp_path / "a")
    write_toy_dataset(spec, tmp_path / "b")
    for name in ("instances.jsonl", "judgments.jsonl"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    write_toy_dataset(ToyDatasetSpec(seed=4), tmp_path / "c")
    assert (tmp_path / "c" / "instances.jsonl").read_bytes() != (tmp_path / "a" / "instances.jsonl").read_bytes()


def test_counts_and_readback(tmp_path):
    spec = ToyDatasetSpec(n_inputs=2, n_systems=3, n_references=2)
    info = write_toy_dataset(spec, tmp_path)
    assert spec.n_records == info["n_instances"] == 10
    instances = read_instances(tmp_path / "instances.jsonl")
    assert len(instances) == 10
    assert sum(i.summarizer_type is SummarizerType.REFERENCE for i in instances) == 4
    assert len(read_scores(tmp_path / "judgments.jsonl")) == 6


def test_judgments_do_not_change_instances():
    with_j, _ = generate_toy_dataset(ToyDatasetSpec(with_judgments=True))
    without, judgments = generate_toy_dataset(ToyDatasetSpec(with_judgments=False))
    assert with_j == without and judgments == []


def test_uncorrupted_system_copies_its_source():
    instances, _ = generate_toy_dataset(ToyDatasetSpec(seed=5))
    peers0 = [i for i in instances if i.summarizer_id == "peer-0"]
    for inst in peers0:
        source = inst.references.references[0]
        assert inst.summary == source.text
        (out,) = score_all(ROUGE1, [inst.with_references([source])])
        assert out["rouge-1"]["f1"] == 1.0


@pytest.mark.parametrize("seed", range(8))
def test_system_level_sign(seed):
    instances, judgments = generate_toy_dataset(ToyDatasetSpec(seed=seed))
    peers = [i for i in instances if i.summarizer_type is SummarizerType.PEER]
    scores = [ScoredRecord(i.instance_id, i.summarizer_id, "peer", m) for i, m in zip(peers, score_all(ROUGE1, peers))]
    human = build_score_table(judgments, JUDGMENT_NAME)
    rouge = build_score_table(scores, "rouge-1/f1")
    assert system_level(human, rouge, spearman).value > 0


@pytest.mark.parametrize(
    "kwargs", [{"n_inputs": 0}, {"n_systems": 1}, {"n_references": 1}, {"vocabulary_size": 4}]
)
def test_spec_validation(kwargs):
    with pytest.raises(UsageError):
        ToyDatasetSpec(**kwargs)
