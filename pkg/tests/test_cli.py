import json
import shutil

import pytest
import yaml

from conftest import GOLD, GOLDEN, MANIFEST
from slice_eval.cli import (
    EXIT_CONFIG,
    EXIT_FINDINGS,
    EXIT_FORMAT,
    EXIT_IO,
    EXIT_OK,
    main,
)
from slice_eval.corpus import PredictionRecord, load_gold, write_records
from slice_eval.gate import wrap_answer
from slice_eval.lineage import canonical_serialize


@pytest.fixture(scope="module")
def self_preds(tmp_path_factory):
    d = tmp_path_factory.mktemp("preds")
    gold = load_gold(GOLD)
    paths = []
    for trial in ("t1", "t2"):
        recs = [PredictionRecord(g.task, wrap_answer(canonical_serialize(g.lineage)), trial) for g in gold]
        path = d / f"{trial}.jsonl"
        write_records(path, recs)
        paths.append(path)
    return paths


def _score(out, preds, *extra):
    argv = ["score", "--gold", str(GOLD), "--out", str(out)]
    for p in preds:
        argv += ["--pred", str(p)]
    return main(argv + list(extra))


def test_self_score(tmp_path, self_preds, capsys):
    assert _score(tmp_path, self_preds[:1]) == EXIT_OK
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["summary"]["mean"] == 1.0 and report["summary"]["std"] == 0.0
    assert report["trials"][0]["script_count"] == 5
    assert set(report["summary"]["strata"]) == {"easy", "medium", "hard"}
    assert (tmp_path / "manifest.json").exists()
    assert "mean" in capsys.readouterr().out


def test_two_trials(tmp_path, self_preds):
    assert _score(tmp_path, self_preds, "--jobs", "2") == EXIT_OK
    report = json.loads((tmp_path / "report.json").read_text())
    assert [t["trial_id"] for t in report["trials"]] == ["t1", "t2"]
    assert len(report["records"]) == 2 * 38


def test_golden_outputs(tmp_path):
    preds = [GOLDEN / "pred_t1.jsonl", GOLDEN / "pred_t2.jsonl"]
    assert _score(tmp_path, preds, "--model", "golden", "--strategy", "base") == EXIT_OK
    for name in ("report.json", "records.tsv", "summary.txt"):
        assert (tmp_path / name).read_bytes() == (GOLDEN / "expected" / name).read_bytes(), name


def test_golden_jobs_identical(tmp_path):
    preds = [GOLDEN / "pred_t1.jsonl", GOLDEN / "pred_t2.jsonl"]
    assert _score(tmp_path, preds, "--model", "golden", "--strategy", "base", "--jobs", "3") == EXIT_OK
    assert (tmp_path / "report.json").read_bytes() == (GOLDEN / "expected" / "report.json").read_bytes()


def test_golden_hand_checked_values():
    report = json.loads((GOLDEN / "expected" / "report.json").read_text())
    rows = {(r["trial_id"], r["target_schema"], r["script_id"]): r for r in report["records"]}
    prefixed = rows[("t1", "CustomerId", "customer_contacts")]
    assert prefixed["m_tbl"] == pytest.approx(0.3 * (1 - 3 / 20), abs=1e-9)
    assert prefixed["slice"] == pytest.approx(0.4 * 0.255 + 0.6, abs=1e-9)
    assert rows[("t2", "OrderCount", "store_sales")]["slice"] == pytest.approx(0.8, abs=1e-9)
    t1 = report["trials"][0]
    assert t1["corpus_score"] == pytest.approx((6.702 / 7 + 5 / 6 + 1 + 4 / 6 + 11 / 12) / 5, abs=1e-9)


def test_missing_config_key(tmp_path, self_preds, capsys):
    from importlib import resources
    data = yaml.safe_load(resources.files("slice_eval.data").joinpath("default_config.yaml").read_text())
    del data["weights"]["aggregation"]["weighted_bleu"]
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(yaml.safe_dump(data))
    assert _score(tmp_path / "out", self_preds[:1], "--config", str(cfg)) == EXIT_CONFIG
    assert "weights.aggregation.weighted_bleu" in capsys.readouterr().err


def test_missing_input(tmp_path):
    assert _score(tmp_path, [tmp_path / "nope.jsonl"]) == EXIT_IO


def test_bad_prediction_file(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"script_id": "x"}\n')
    assert _score(tmp_path / "o", [bad]) == EXIT_FORMAT


def test_report_tables(tmp_path, self_preds):
    _score(tmp_path / "a", self_preds[:1], "--model", "m1", "--strategy", "base")
    _score(tmp_path / "b", self_preds, "--model", "m1", "--strategy", "cot-1")
    assert main(["report", str(tmp_path / "a"), str(tmp_path / "b"), "--out", str(tmp_path / "r")]) == EXIT_OK
    table = (tmp_path / "r" / "table.tsv").read_text().splitlines()
    assert table[0] == "model\tbase_mean\tbase_std\tcot-1_mean\tcot-1_std"
    assert table[1].startswith("m1\t1.0000000000\t0.0000000000\t0.0000000000")
    assert (tmp_path / "r" / "strata" / "m1__base.tsv").read_text().startswith("level\tmean\tstd\neasy")


def test_report_incompatible(tmp_path, self_preds):
    data = yaml.safe_load((GOLDEN.parent.parent / "src/slice_eval/data/default_config.yaml").read_text())
    data["weights"]["composite"] = {"table": 0.5, "transformation": 0.3, "aggregation": 0.2}
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(yaml.safe_dump(data))
    _score(tmp_path / "a", self_preds[:1], "--model", "m1")
    _score(tmp_path / "b", self_preds[:1], "--model", "m2", "--config", str(cfg))
    assert main(["report", str(tmp_path / "a"), str(tmp_path / "b"), "--out", str(tmp_path / "r")]) \
        == EXIT_CONFIG


def test_validate(tmp_path, capsys):
    assert main(["validate", "--gold", str(GOLD)]) == EXIT_OK
    bad = tmp_path / "g.jsonl"
    shutil.copy(GOLD, bad)
    with open(bad, "a") as fh:
        fh.write(json.dumps({"script_id": "s", "target_schema": "c", "lineage": {
            "source_schema": ["a"], "source_table": ["t"], "transformation": ["x <CODEEND> y"],
            "aggregation": []}}) + "\n")
    capsys.readouterr()
    assert main(["validate", "--gold", str(bad)]) == EXIT_FINDINGS
    out = capsys.readouterr().out
    assert ":39:" in out and "<CODEEND>" in out and "1 findings" in out


def test_difficulty(capsys):
    assert main(["difficulty", "--corpus", str(MANIFEST), "--detect"]) == EXIT_OK
    lines = dict(l.split("\t", 1) for l in capsys.readouterr().out.splitlines())
    assert lines["bank_monthly_spend"].startswith("hard\tdeclared")
    assert "sources=3 chain=yes aggregation=yes -> hard" in lines["bank_monthly_spend"]


def test_prompt(tmp_path):
    assert main(["prompt", "--corpus", str(MANIFEST), "--strategy", "cot-3", "--out", str(tmp_path)]) == EXIT_OK
    text = (tmp_path / "bank_monthly_spend.cot-3.txt").read_text()
    assert text.count("<think>") == 4  # format instruction plus three worked examples
    easy = (tmp_path / "customer_contacts.cot-3.txt").read_text()
    assert "Example 2:" not in easy


def test_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["score"])
    assert exc.value.code == 2
