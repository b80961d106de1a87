import sys
from pathlib import Path

import pytest

from sumscore.data import EvalInstance, Reference, ReferencesField, SummarizerType, SummaryField

TESTS_DIR = Path(__file__).parent
STUBS_DIR = TESTS_DIR / "stubs"
DATA_DIR = TESTS_DIR / "data"

sys.path.insert(0, str(TESTS_DIR))


def make_instance(summary, refs=None, instance_id="d1", summarizer_id="s1", summarizer_type="peer", **extra):
    fields = {"summary": SummaryField(summary)}
    if refs is not None:
        if refs and not isinstance(refs[0], Reference):
            refs = [Reference(f"r{i}", text) for i, text in enumerate(refs)]
        fields["references"] = ReferencesField(tuple(refs))
    fields.update(extra)
    return EvalInstance(instance_id, summarizer_id, SummarizerType(summarizer_type), fields)


@pytest.fixture(autouse=True)
def resource_home(tmp_path, monkeypatch):
    """Keep installed resources of the machine running the tests out of the way."""
    home = tmp_path / "home"
    monkeypatch.setenv("SUMSCORE_HOME", str(home))
    return home
