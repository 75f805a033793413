"""Command-line entry point: ``slice-eval <command>``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .client import EndpointUnreachable, load_endpoint_config, run_extraction
from .corpus import (
    CorpusError,
    MissingFeatures,
    detect_features,
    difficulty_level,
    load_corpus,
    load_gold,
    load_predictions,
    validate_gold,
    write_records,
)
from .lineage import LineageError
from .prompts import STRATEGIES, ArityMismatch, build_prompt, is_reasoning, spec_for_script
from .report import (
    IncompatibleReports,
    ReportError,
    build_report,
    load_reports,
    score_trials,
    summary_text,
    write_report_tables,
    write_score_outputs,
)
from .scoring import ConfigError, load_config

EXIT_OK, EXIT_FINDINGS, EXIT_USAGE, EXIT_IO, EXIT_FORMAT, EXIT_CONFIG, EXIT_ENDPOINT = 0, 1, 2, 3, 4, 5, 6

log = logging.getLogger("slice_eval")


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _default_manifest(gold_path: Path):
    candidate = gold_path.parent / "manifest.yaml"
    return candidate if candidate.exists() else None


def cmd_score(args) -> int:
    gold_path = Path(args.gold)
    paths = [gold_path, *map(Path, args.pred)] + ([Path(args.config)] if args.config else [])
    missing = [str(p) for p in paths if not p.exists()]
    if missing:
        return _fail(EXIT_IO, f"missing input file(s): {', '.join(missing)}")
    try:
        config = load_config(args.config)
    except (ConfigError, LineageError, OSError) as exc:
        return _fail(EXIT_CONFIG, str(exc))
    overrides = {}
    if args.strategy:
        overrides["reasoning"] = is_reasoning(args.strategy)
    if args.lenient is not None:
        overrides["lenient"] = args.lenient
    if overrides:
        config = config.__class__(**{**{f: getattr(config, f) for f in config.__dataclass_fields__},
                                     **overrides})
    try:
        gold = load_gold(gold_path)
        predictions = [p for path in args.pred for p in load_predictions(path)]
        manifest = Path(args.corpus) if args.corpus else _default_manifest(gold_path)
        labels = load_corpus(manifest).labels() if manifest else None
        trials = score_trials(gold, predictions, config, jobs=args.jobs)
        report = build_report(trials, config, labels, model=args.model or "",
                              strategy=args.strategy or "")
    except (CorpusError, ReportError, MissingFeatures, ValueError) as exc:
        return _fail(EXIT_FORMAT, str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    out = Path(args.out)
    write_score_outputs(report, out)
    run_manifest = {
        "tool_version": __version__,
        "emitted_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config": str(args.config) if args.config else None,
        "gold": str(gold_path),
        "predictions": [str(p) for p in args.pred],
        "corpus": str(manifest) if manifest else None,
        "output_dir": str(out),
    }
    (out / "manifest.json").write_text(json.dumps(run_manifest, indent=2) + "\n", encoding="utf-8")
    print(summary_text(report), end="")
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        reports = load_reports(args.reports)
    except IncompatibleReports as exc:
        return _fail(EXIT_CONFIG, str(exc))
    except (OSError, ValueError, KeyError) as exc:
        return _fail(EXIT_IO if isinstance(exc, OSError) else EXIT_FORMAT, str(exc))
    for path in write_report_tables(reports, args.out):
        print(path)
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        findings = validate_gold(args.gold)
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    for line_no, msg in findings:
        print(f"{args.gold}:{line_no}: {msg}")
    print(f"{len(findings)} findings")
    return EXIT_FINDINGS if findings else EXIT_OK


def cmd_prompt(args) -> int:
    try:
        corpus = load_corpus(args.corpus)
    except (CorpusError, OSError) as exc:
        return _fail(EXIT_IO if isinstance(exc, OSError) else EXIT_FORMAT, str(exc))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    status = EXIT_OK
    for sid, entry in corpus.entries.items():
        try:
            level = corpus.labels()[sid]
            spec = spec_for_script(args.strategy, entry.script, entry.examples, level)
        except (ArityMismatch, MissingFeatures) as exc:
            print(f"{sid}: {exc}", file=sys.stderr)
            status = EXIT_FORMAT
            continue
        path = out / f"{sid}.{args.strategy}.txt"
        path.write_text(build_prompt(spec), encoding="utf-8")
        print(path)
    return status


def cmd_difficulty(args) -> int:
    try:
        corpus = load_corpus(args.corpus)
    except (CorpusError, OSError) as exc:
        return _fail(EXIT_IO if isinstance(exc, OSError) else EXIT_FORMAT, str(exc))
    for sid, entry in corpus.entries.items():
        script = entry.script
        detected = detect_features(script)
        if script.difficulty is not None:
            level, basis = script.difficulty, "declared"
        elif script.features is not None:
            level, basis = difficulty_level(script.features), "declared-features"
        else:
            level, basis = difficulty_level(detected), "detected"
        extra = ""
        if args.detect:
            extra = (f"\tdetected: sources={detected.source_count} "
                     f"chain={'yes' if detected.has_transformation_chain else 'no'} "
                     f"aggregation={'yes' if detected.has_aggregation else 'no'} "
                     f"-> {difficulty_level(detected)}")
        print(f"{sid}\t{level}\t{basis}{extra}")
    return EXIT_OK


def cmd_extract(args) -> int:
    try:
        corpus = load_corpus(args.corpus)
        gold = load_gold(args.gold)
        endpoint = load_endpoint_config(args.endpoint)
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    except (CorpusError, ValueError, TypeError) as exc:
        return _fail(EXIT_CONFIG if "endpoint" in str(exc) else EXIT_FORMAT, str(exc))
    if args.jobs:
        endpoint = endpoint.__class__(**{**endpoint.__dict__, "workers": args.jobs})
    try:
        records = run_extraction(corpus, gold, args.strategy, endpoint, args.trial, args.seed)
    except EndpointUnreachable as exc:
        return _fail(EXIT_ENDPOINT, str(exc))
    except (ArityMismatch, KeyError) as exc:
        return _fail(EXIT_FORMAT, str(exc))
    write_records(args.out, records)
    meta = {
        "tool_version": __version__,
        "emitted_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "strategy": args.strategy,
        "trial_id": args.trial,
        "seed": args.seed,
        "endpoint": endpoint.__dict__,  # api_key_env holds a variable name, never the token
        "records": len(records),
    }
    meta_path = Path(str(args.out) + ".meta.json")
    meta_path.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    failed = sum(1 for r in records if r.note)
    print(f"{len(records)} records written to {args.out} ({failed} failed requests)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slice-eval", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score prediction files against gold lineages")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", action="append", required=True, help="prediction file, one per trial")
    p.add_argument("--config")
    p.add_argument("--corpus", help="script manifest for difficulty strata "
                                    "(default: manifest.yaml next to the gold file)")
    p.add_argument("--out", required=True)
    p.add_argument("--strategy", choices=STRATEGIES,
                   help="prompting strategy; cot-* switches the gate to reasoning mode")
    p.add_argument("--model", help="model label recorded in the report")
    strict = p.add_mutually_exclusive_group()
    strict.add_argument("--strict", dest="lenient", action="store_false", default=None)
    strict.add_argument("--lenient", dest="lenient", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("report", help="build model x strategy tables from score reports")
    p.add_argument("reports", nargs="+", help="report.json files or score output directories")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("validate", help="check a gold file")
    p.add_argument("--gold", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("prompt", help="render per-script prompts")
    p.add_argument("--corpus", required=True)
    p.add_argument("--strategy", choices=STRATEGIES, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prompt)

    p = sub.add_parser("difficulty", help="print difficulty labels")
    p.add_argument("--corpus", required=True)
    p.add_argument("--detect", action="store_true", help="also show heuristic feature detection")
    p.set_defaults(func=cmd_difficulty)

    p = sub.add_parser("extract", help="query a chat-completion endpoint for predictions")
    p.add_argument("--corpus", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--endpoint", required=True, help="endpoint YAML config")
    p.add_argument("--strategy", choices=STRATEGIES, required=True)
    p.add_argument("--trial", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_extract)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
