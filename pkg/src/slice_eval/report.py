"""Score prediction files against gold and render reports."""
from __future__ import annotations

import json
import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

from . import __version__
from .corpus import GoldRecord, PredictionRecord
from .lineage import LineageTask
from .scoring import (
    LEVELS,
    EvaluationConfig,
    ScoredRecord,
    corpus_score,
    per_script_scores,
    slice_score,
    stratify,
    trial_stats,
)

DIGITS = 10


class ReportError(ValueError):
    pass


class IncompatibleReports(ReportError):
    pass


def _r(x: float) -> float:
    # rounding keeps reports byte-stable across libm implementations
    return round(x, DIGITS) + 0.0


def _score_chunk(args):
    items, config = args
    return [slice_score(raw, gold, config, task, trial) for raw, gold, task, trial in items]


def score_trials(
    gold: Sequence[GoldRecord],
    predictions: Sequence[PredictionRecord],
    config: EvaluationConfig,
    jobs: int = 1,
) -> dict[str, list[ScoredRecord]]:
    """Score every gold task once per trial, in gold order.

    Tasks without a prediction in a trial score 0 with a ``missing`` note.
    """
    gold_by_key = {g.task.key: g for g in gold}
    by_trial: dict[str, dict[tuple, PredictionRecord]] = defaultdict(dict)
    for p in predictions:
        if p.task.key not in gold_by_key:
            raise ReportError(f"prediction for unknown task {p.task.key} in trial {p.trial_id!r}")
        if p.task.key in by_trial[p.trial_id]:
            raise ReportError(f"duplicate prediction for {p.task.key} in trial {p.trial_id!r}")
        by_trial[p.trial_id][p.task.key] = p

    work, slots = [], []
    for trial in sorted(by_trial):
        preds = by_trial[trial]
        for g in gold:
            p = preds.get(g.task.key)
            if p is None:
                slots.append(ScoredRecord(g.task, 0, 0, 0.0, 0.0, 0.0, 0.0,
                                          ("missing prediction",), trial))
            else:
                slots.append(None)
                work.append((p.raw_response, g.lineage, g.task, trial))

    if jobs > 1 and len(work) > 1:
        size = math.ceil(len(work) / (jobs * 4))
        chunks = [(work[i:i + size], config) for i in range(0, len(work), size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            scored = [r for part in pool.map(_score_chunk, chunks) for r in part]
    else:
        scored = _score_chunk((work, config))
    it = iter(scored)
    out: dict[str, list[ScoredRecord]] = defaultdict(list)
    for slot in slots:
        rec = slot if slot is not None else next(it)
        out[rec.trial_id].append(rec)
    return dict(out)


def build_report(
    trials: Mapping[str, Sequence[ScoredRecord]],
    config: EvaluationConfig,
    labels: Optional[Mapping[str, str]] = None,
    model: str = "",
    strategy: str = "",
) -> dict:
    if not trials:
        raise ReportError("no trials to report")
    trial_rows, corpus_values = [], []
    strata_values: dict[str, list[float]] = defaultdict(list)
    for trial_id in sorted(trials):
        records = trials[trial_id]
        scripts = per_script_scores(records)
        corpus = corpus_score(v for v, _ in scripts.values())
        corpus_values.append(corpus)
        row = {
            "trial_id": trial_id,
            "corpus_score": _r(corpus),
            "script_count": len(scripts),
            "missing": sum(1 for r in records if "missing prediction" in r.diagnostics),
            "scripts": {sid: {"score": _r(v), "schemas": k} for sid, (v, k) in scripts.items()},
        }
        if labels is not None:
            strata = stratify({sid: v for sid, (v, _) in scripts.items()}, labels)
            row["strata"] = {lvl: _r(v) for lvl, v in strata.items()}
            for lvl, v in strata.items():
                strata_values[lvl].append(v)
        trial_rows.append(row)
    mean, std = trial_stats(corpus_values)
    summary = {"trials": len(corpus_values), "mean": _r(mean), "std": _r(std)}
    if labels is not None:
        summary["strata"] = {}
        for lvl in LEVELS:
            if lvl in strata_values:
                m, s = trial_stats(strata_values[lvl])
                summary["strata"][lvl] = {"mean": _r(m), "std": _r(s)}
    return {
        "tool": {"name": "slice-eval", "version": __version__},
        "model": model,
        "strategy": strategy,
        "config": config.to_dict(),
        "std": "population",
        "summary": summary,
        "trials": trial_rows,
        "records": [record_row(r) for t in sorted(trials) for r in trials[t]],
    }


def record_row(r: ScoredRecord) -> dict:
    return {
        "trial_id": r.trial_id, "script_id": r.task.script_id, "target_schema": r.task.target_schema,
        "m_fmt": r.m_fmt, "m_src": r.m_src, "m_tbl": _r(r.m_tbl), "m_trf": _r(r.m_trf),
        "m_agg": _r(r.m_agg), "slice": _r(r.slice), "diagnostics": list(r.diagnostics),
    }


_RECORD_COLUMNS = ("trial_id", "script_id", "target_schema", "m_fmt", "m_src", "m_tbl", "m_trf",
                   "m_agg", "slice", "diagnostics")


def _cell(v) -> str:
    if isinstance(v, list):
        v = " | ".join(v)
    if isinstance(v, float):
        v = f"{v:.{DIGITS}f}"
    return str(v).replace("\t", " ").replace("\n", " ")


def aligned(rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows) + "\n"


def summary_text(report: dict) -> str:
    rows = [["trial", "corpus", "scripts", "missing"]]
    for t in report["trials"]:
        rows.append([t["trial_id"], f"{t['corpus_score']:.4f}", str(t["script_count"]), str(t["missing"])])
    s = report["summary"]
    rows.append(["mean", f"{s['mean']:.4f}", "", ""])
    rows.append([f"std ({report['std']})", f"{s['std']:.4f}", "", ""])
    text = aligned(rows)
    if "strata" in s:
        srows = [["difficulty", "mean", "std"]]
        srows += [[lvl, f"{v['mean']:.4f}", f"{v['std']:.4f}"] for lvl, v in s["strata"].items()]
        text += "\n" + aligned(srows)
    return text


def write_score_outputs(report: dict, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=2, ensure_ascii=False) + "\n",
                                     encoding="utf-8")
    lines = ["\t".join(_RECORD_COLUMNS)]
    lines += ["\t".join(_cell(row[c]) for c in _RECORD_COLUMNS) for row in report["records"]]
    (out / "records.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (out / "summary.txt").write_text(summary_text(report), encoding="utf-8")


# --- cross-run tables ----------------------------------------------------

def load_reports(paths: Sequence) -> list[dict]:
    reports = []
    for p in paths:
        p = Path(p)
        if p.is_dir():
            p = p / "report.json"
        reports.append(json.loads(p.read_text("utf-8")))
    if not reports:
        raise ReportError("no report files given")
    base = reports[0]["config"]["weights"]
    for p, r in zip(paths, reports):
        if r["config"]["weights"] != base:
            raise IncompatibleReports(f"{p}: weight configuration differs from {paths[0]}")
    return reports


def model_strategy_table(reports: Sequence[dict]) -> tuple[list[str], list[str], dict]:
    models = list(dict.fromkeys(r["model"] or "model" for r in reports))
    strategies = list(dict.fromkeys(r["strategy"] or "strategy" for r in reports))
    cells = {}
    for r in reports:
        key = (r["model"] or "model", r["strategy"] or "strategy")
        if key in cells:
            raise ReportError(f"two reports for model/strategy {key}")
        cells[key] = (r["summary"]["mean"], r["summary"]["std"])
    return models, strategies, cells


def write_report_tables(reports: Sequence[dict], out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    models, strategies, cells = model_strategy_table(reports)
    tsv = ["model\t" + "\t".join(f"{s}_mean\t{s}_std" for s in strategies)]
    txt = [["model"] + strategies]
    for m in models:
        vals, shown = [], []
        for s in strategies:
            if (m, s) in cells:
                mean, std = cells[(m, s)]
                vals += [f"{mean:.{DIGITS}f}", f"{std:.{DIGITS}f}"]
                shown.append(f"{mean:.3f} ± {std:.3f}")
            else:
                vals += ["", ""]
                shown.append("-")
        tsv.append("\t".join([m] + vals))
        txt.append([m] + shown)
    written = [out / "table.tsv", out / "table.txt"]
    written[0].write_text("\n".join(tsv) + "\n", encoding="utf-8")
    written[1].write_text(aligned(txt), encoding="utf-8")
    series_dir = out / "strata"
    for r in reports:
        strata = r["summary"].get("strata")
        if not strata:
            continue
        series_dir.mkdir(exist_ok=True)
        name = f"{r['model'] or 'model'}__{r['strategy'] or 'strategy'}.tsv".replace("/", "_")
        rows = ["level\tmean\tstd"] + [f"{lvl}\t{v['mean']:.{DIGITS}f}\t{v['std']:.{DIGITS}f}"
                                       for lvl, v in strata.items()]
        (series_dir / name).write_text("\n".join(rows) + "\n", encoding="utf-8")
        written.append(series_dir / name)
    return written
