import json
from pathlib import Path

import pytest

from slice_eval.corpus import load_corpus, load_gold
from slice_eval.scoring import load_config

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "src" / "slice_eval" / "data"
MINICORPUS = DATA / "minicorpus"
GOLD = MINICORPUS / "gold.jsonl"
MANIFEST = MINICORPUS / "manifest.yaml"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def config():
    return load_config()


@pytest.fixture(scope="session")
def gold():
    return load_gold(GOLD)


@pytest.fixture(scope="session")
def corpus():
    return load_corpus(MANIFEST)


@pytest.fixture(scope="session")
def worked_lineage():
    return json.loads((Path(__file__).parent / "fixtures_worked_lineage.json").read_text("utf-8"))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.result_lines():
        terminalreporter.write_line(line)
