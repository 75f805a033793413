"""Acceptance suite: one check per criterion, each reported as a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (the lines appear in the
terminal summary) or directly with ``python tests/test_acceptance.py``.
"""
import itertools
import json
import math
import random
import re
import string
import sys
import time
from functools import partial
from pathlib import Path

import pytest
import tree_sitter
import tree_sitter_c_sharp
import tree_sitter_python
import tree_sitter_sql

sys.path.insert(0, str(Path(__file__).parent))

from conftest import GOLD, GOLDEN, MANIFEST  # noqa: E402
from oracles import (  # noqa: E402
    edit_distance_blocks,
    edit_distance_recursive,
    ratio_oracle,
    reference_bleu,
)
from slice_eval.codesim import (  # noqa: E402
    ast_similarity,
    bleu,
    bleu_tokens,
    default_lexicons,
    language_weights,
    tokenize_code,
)
from slice_eval.corpus import (  # noqa: E402
    GoldRecord,
    PredictionRecord,
    ScriptFeatures,
    detect_features,
    difficulty_level,
    load_corpus,
    load_gold,
    load_predictions,
    parse_multilang_script,
)
from slice_eval.gate import wrap_answer  # noqa: E402
from slice_eval.lineage import LineageTask, SchemaLineage, canonical_serialize  # noqa: E402
from slice_eval.matching import fuzzy_f, fuzzy_match  # noqa: E402
from slice_eval.report import build_report, score_trials, write_score_outputs  # noqa: E402
from slice_eval.scoring import (  # noqa: E402
    ConfigError,
    EvaluationConfig,
    composite,
    corpus_score,
    load_config,
    per_script_scores,
    slice_score,
)

pytestmark = pytest.mark.acceptance

HERE = Path(__file__).parent
RESULTS: dict[int, tuple[bool, str]] = {}


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (bool(ok), detail)
    assert ok, f"criterion {n}: {detail}"


def result_lines() -> list[str]:
    return [f"{'PASS' if ok else 'FAIL'} criterion {n:>2}: {detail}"
            for n, (ok, detail) in sorted(RESULTS.items())]


def _answer(lineage: SchemaLineage) -> str:
    return wrap_answer(canonical_serialize(lineage))


# 1 ---------------------------------------------------------------------

def test_c01_self_consistency():
    config = load_config()
    gold = load_gold(GOLD)
    start = time.perf_counter()
    worst = max(abs(1.0 - slice_score(_answer(g.lineage), g.lineage, config).slice) for g in gold)
    elapsed = time.perf_counter() - start
    record(1, worst <= 1e-9 and elapsed < 1.0,
           f"{len(gold)} gold lineages self-score 1.0 (max |err| {worst:.1e}) in {elapsed:.3f}s")


# 2 ---------------------------------------------------------------------

def _mutations(body: str, lineage: SchemaLineage):
    d = lineage.to_text_dict()
    renamed = dict(d)
    renamed["sources"] = renamed.pop("source_schema")
    extra = dict(d, notes="")
    missing = {k: v for k, v in d.items() if k != "aggregation"}
    cased = {k.upper() if k == "source_table" else k: v for k, v in d.items()}
    return [
        body.replace("<answer>", ""),
        body.replace("</answer>", ""),
        body.replace("<answer>", "<answer>").replace("</answer>", "") + " <answer>",
        "<answer> <answer> " + body[len("<answer> "):],
        body + " <answer> {} </answer>",
        body.replace("<answer>", "<Answer>"),
        body.replace("</answer>", "<answer>"),
        "</answer> " + body[len("<answer> "):-len(" </answer>")] + " <answer>",
        "<think> reasoning </think> " + body,
        body.replace("</answer>", "<think> x </think> </answer>"),
        "<answer> " + json.dumps(renamed) + " </answer>",
        "<answer> " + json.dumps(extra) + " </answer>",
        "<answer> " + json.dumps(missing) + " </answer>",
        "<answer> " + json.dumps(cased) + " </answer>",
        "<answer> " + json.dumps(list(d.values())) + " </answer>",
        "<answer> " + json.dumps(dict(d, source_table=["t"])) + " </answer>",
        "<answer> " + repr(d) + " </answer>",
        "<answer> " + json.dumps(d)[:-1] + " </answer>",
        "<answer>  </answer>",
        "",
    ]


def test_c02_gate_nullification():
    config = load_config()
    gold = load_gold(GOLD)
    rng = random.Random(2)
    cases = []
    for g in gold:
        body = _answer(g.lineage)
        cases += [(m, g.lineage) for m in _mutations(body, g.lineage)]
    rng.shuffle(cases)
    cases = cases[:100]
    scores = [slice_score(raw, lin, config).slice for raw, lin in cases]
    nonzero = sum(1 for s in scores if s != 0.0)
    record(2, len(cases) == 100 and nonzero == 0,
           f"{len(cases)} mutated responses, {nonzero} scored above 0")


# 3 ---------------------------------------------------------------------

def test_c03_composite_arithmetic():
    config = load_config()
    value = composite(1, 1, 1.0, 0.5, 1.0, config)
    rejected = 0
    trials = 0
    base = config.to_dict()
    for section, key in [("composite", "table"), ("composite", "aggregation"),
                         ("table", "exact_f1"), ("transformation", "bleu"),
                         ("aggregation", "ast_multi")]:
        for delta in (2e-9, -2e-9, 0.01):
            data = json.loads(json.dumps(base))
            data["weights"][section][key] += delta
            trials += 1
            try:
                EvaluationConfig.from_mapping(data)
            except ConfigError:
                rejected += 1
    # drift below tolerance is still accepted
    data = json.loads(json.dumps(base))
    data["weights"]["composite"]["table"] += 5e-10
    EvaluationConfig.from_mapping(data)
    record(3, value == 0.8 and rejected == trials,
           f"composite(1,1,1,0.5,1) = {value!r}; {rejected}/{trials} off-sum configs rejected")


# 4 ---------------------------------------------------------------------

def test_c04_levenshtein_oracle():
    import numpy as np

    alphabet, max_len = "abc", 8
    by_len = {n: ["".join(p) for p in itertools.product(alphabet, repeat=n)] for n in range(max_len + 1)}
    # spot-check the exhaustive table against the plain recursion first
    rng = random.Random(4)
    table_bad = pairs = 0
    for la, lb, block in edit_distance_blocks(alphabet, max_len):
        for _ in range(3):
            i, j = rng.randrange(block.shape[0]), rng.randrange(block.shape[1])
            table_bad += int(block[i, j]) != edit_distance_recursive(by_len[la][i], by_len[lb][j])
        n = max(la, lb)
        partners = by_len[lb]
        for i, a in enumerate(by_len[la]):
            got = np.fromiter(map(partial(fuzzy_match, a), partners), float, count=len(partners))
            expected = np.ones(len(partners)) if n == 0 else 1.0 - block[i] / n
            table_bad += int(np.count_nonzero(got != expected))
        pairs += block.size
    alphabet40 = string.ascii_lowercase + "._"
    rand = [("".join(rng.choices(alphabet40, k=rng.randint(0, 40))),
             "".join(rng.choices(alphabet40, k=rng.randint(0, 40)))) for _ in range(1000)]
    rand_bad = sum(1 for a, b in rand if fuzzy_match(a, b) != ratio_oracle(a, b))
    record(4, table_bad == 0 and rand_bad == 0 and pairs == 9841 ** 2,
           f"all {pairs} pairs over {{a,b,c}} up to len 8 and {len(rand)} random pairs up to len 40; "
           f"{table_bad + rand_bad} disagreements")


# 5 ---------------------------------------------------------------------

def _snippet_pool():
    pool = []
    for g in load_gold(GOLD):
        pool += list(g.lineage.transformation) + list(g.lineage.aggregation)
    return pool


def _perturb(tokens, rng):
    out = list(tokens)
    for _ in range(rng.randint(0, max(1, len(out) // 3))):
        op = rng.random()
        i = rng.randrange(len(out)) if out else 0
        if op < 0.3 and out:
            del out[i]
        elif op < 0.6 and out:
            out[i] = rng.choice(["x", "AS", ")", "SUM", "col", "1"])
        else:
            out.insert(i, rng.choice(["(", "y", "F", ".", "AND"]))
    return out or ["x"]


def test_c05_bleu_oracle():
    rng = random.Random(5)
    pool = _snippet_pool()
    diffs = []
    for _ in range(200):
        gold = tokenize_code(" ".join(rng.sample(pool, rng.randint(1, 3))))
        pred = _perturb(gold, rng)
        diffs.append(abs(bleu_tokens(pred, gold) - reference_bleu(pred, gold)))
        text_pred = " ".join(pred)
        diffs.append(abs(bleu(text_pred, " ".join(gold))
                         - reference_bleu(tokenize_code(text_pred), tokenize_code(" ".join(gold)))))
    vocab = tokenize_code(" ".join(pool))
    identity = all(bleu_tokens(seq, list(seq)) == 1.0
                   for n in range(1, 51) for seq in [rng.choices(vocab, k=n)])
    worst = max(diffs)
    record(5, worst <= 1e-6 and identity,
           f"{len(diffs)} random pairs vs reference BLEU (max diff {worst:.1e}); "
           f"identity = 1.0 for gold lengths 1-50: {identity}")


# 6 ---------------------------------------------------------------------

def test_c06_fuzzy_hand_case():
    value = fuzzy_f({"Customers"}, {"db.Customers"})
    expected = 1 - edit_distance_recursive("Customers", "db.Customers") / 12
    record(6, abs(value - 0.75) <= 1e-9 and expected == 0.75,
           f"F_u({{Customers}}, {{db.Customers}}) = {value!r}")


# 7 ---------------------------------------------------------------------

def test_c07_language_attribution():
    lex = {lx.language: lx for lx in default_lexicons()}
    rng = random.Random(7)
    every = sorted({k for lx in lex.values() for k in lx.keywords})
    noise = ["foo", "bar_1", "x", "(", ")", ".", "42", "'s'", "qq"]
    sums = []
    for _ in range(1000):
        toks = rng.choices(every + noise, k=rng.randint(0, 30))
        sums.append(math.fsum(language_weights(" ".join(toks)).values()))
    worst = max(abs(s - 1.0) for s in sums)
    sql_only = sorted(k for k in lex["sql"].keywords
                      if not any(k in o for n, o in lex.items() if n != "sql"))
    sql_ok = all(language_weights(" ".join(rng.choices(sql_only, k=rng.randint(1, 12))))["sql"] == 1.0
                 for _ in range(200))
    uniform = {n: 1 / len(lex) for n in lex}
    free_ok = all(language_weights(" ".join(rng.choices(noise, k=rng.randint(0, 12)))) == uniform
                  for _ in range(200))
    record(7, worst <= 1e-12 and sql_ok and free_ok,
           f"1000 random snippets sum to 1 (max |err| {worst:.1e}); SQL-only -> w_sql=1: {sql_ok}; "
           f"keyword-free -> uniform: {free_ok}")


# 8 ---------------------------------------------------------------------

_TS = {
    "sql": (tree_sitter_sql.language, ("", "SELECT ")),
    "python": (tree_sitter_python.language, ("",)),
    "csharp": (tree_sitter_c_sharp.language, ("",)),
}


def rename_identifiers(snippet: str, language: str, tag: str = "zq") -> str:
    """Consistently rename every ``identifier`` leaf, located with a fresh parser."""
    grammar, prefixes = _TS[language]
    parser = tree_sitter.Parser(tree_sitter.Language(grammar()))
    best = None
    for prefix in prefixes:
        tree = parser.parse((prefix + snippet).encode("utf-8"))
        errors = sum(1 for n in _walk(tree.root_node) if n.is_error or n.is_missing)
        if best is None or errors < best[0]:
            best = (errors, prefix, tree)
    _, prefix, tree = best
    data = (prefix + snippet).encode("utf-8")
    spans = [(n.start_byte, n.end_byte) for n in _walk(tree.root_node)
             if n.type == "identifier" and n.child_count == 0 and n.start_byte >= len(prefix)]
    names: dict[bytes, bytes] = {}
    for s, e in sorted(spans, reverse=True):
        old = data[s:e]
        new = names.setdefault(old, f"{tag}{len(names)}v".encode())
        data = data[:s] + new + data[e:]
    return data.decode("utf-8")[len(prefix):]


def _walk(node):
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(n.children)


def test_c08_ast_properties():
    fixture = json.loads((HERE / "fixtures_ast.json").read_text("utf-8"))
    n_snippets = sum(len(v) for v in fixture.values())
    identity = all(ast_similarity(s, s, lang) == 1.0 for lang, snips in fixture.items() for s in snips)
    changed = renamed_ok = 0
    in_range = True
    for lang, snips in fixture.items():
        for x in snips:
            rx = rename_identifiers(x, lang)
            changed += rx != x
            for y in snips:
                a, b = ast_similarity(x, y, lang), ast_similarity(rx, y, lang)
                in_range &= 0.0 <= a <= 1.0
                renamed_ok += a == b
    pairs = sum(len(v) ** 2 for v in fixture.values())
    record(8, n_snippets == 30 and identity and renamed_ok == pairs and changed == n_snippets and in_range,
           f"{n_snippets} snippets self-similar: {identity}; renaming invariant on "
           f"{renamed_ok}/{pairs} pairs; values in [0,1]: {in_range}")


# 9 ---------------------------------------------------------------------

def test_c09_aggregation_law():
    config = load_config()
    gold = load_gold(GOLD)
    preds = load_predictions(GOLDEN / "pred_t1.jsonl")
    records = score_trials(gold, preds, config)["t1"]
    groups: dict[str, list[float]] = {}
    for r in records:
        groups.setdefault(r.task.script_id, []).append(r.slice)
    script_means = [sum(v) / len(v) for v in groups.values()]
    expected = sum(script_means) / len(script_means)
    rng = random.Random(9)
    worst = 0.0
    for _ in range(200):
        perm = list(records)
        rng.shuffle(perm)
        got = corpus_score(v for v, _ in per_script_scores(perm).values())
        worst = max(worst, abs(got - expected))
    record(9, worst <= 1e-12, f"200 record permutations, max |corpus - mean(script)| = {worst:.1e}")


# 10 --------------------------------------------------------------------

def test_c10_difficulty_table():
    expected = {0: "easy", 1: "easy", 2: "medium", 3: "hard"}
    combos = list(itertools.product([False, True], repeat=3))
    ok = all(difficulty_level(ScriptFeatures(3 if s else 1, c, a)) == expected[s + c + a]
             for s, c, a in combos)
    raw = (MANIFEST.parent / "scripts" / "bank_monthly_spend.py").read_text("utf-8")
    hard = parse_multilang_script(raw, "hard")
    level = difficulty_level(detect_features(hard))
    declared = load_corpus(MANIFEST).labels()["bank_monthly_spend"]
    record(10, ok and len(combos) == 8 and level == "hard" and declared == "hard",
           f"8 feature combinations match the table: {ok}; multi-language hard script -> {level}")


# 11 --------------------------------------------------------------------

def test_c11_golden_end_to_end(tmp_path):
    config = load_config()
    gold = load_gold(GOLD)
    labels = load_corpus(MANIFEST).labels()
    preds = load_predictions(GOLDEN / "pred_t1.jsonl") + load_predictions(GOLDEN / "pred_t2.jsonl")
    names = ("report.json", "records.tsv", "summary.txt")
    same = True
    for run, jobs in enumerate((1, 1, 2)):
        trials = score_trials(gold, preds, config, jobs=jobs)
        report = build_report(trials, config, labels, model="golden", strategy="base")
        out = tmp_path / f"run{run}"
        write_score_outputs(report, out)
        for name in names:
            same &= (out / name).read_bytes() == (GOLDEN / "expected" / name).read_bytes()
    record(11, same, "three runs (serial and parallel) byte-identical to committed golden outputs")


# 12 --------------------------------------------------------------------

_WORD = re.compile(r"\b([a-z][a-z_]*_[a-z_]+|[a-z]{4,})\b")


def synthetic_records(n: int, seed: int = 12):
    """``n`` distinct gold/prediction pairs derived from the mini-corpus.

    Lower-case identifiers get per-record suffixes so no two records share
    snippet text, which keeps parse caches from short-circuiting the work.
    """
    rng = random.Random(seed)
    base = load_gold(GOLD)
    gold, preds = [], []
    for i in range(n):
        g = base[i % len(base)]
        suffix = f"_{i}"

        def vary(text, suffix=suffix):
            return _WORD.sub(lambda m: m.group(1) + suffix, text)

        lin = SchemaLineage(frozenset(map(vary, g.lineage.source_schema)),
                            frozenset(map(vary, g.lineage.source_table)),
                            tuple(map(vary, g.lineage.transformation)),
                            tuple(map(vary, g.lineage.aggregation)))
        task = LineageTask(f"{g.task.script_id}_{i // 40}", f"{g.task.target_schema}_{i}")
        gold.append(GoldRecord(task, lin))
        roll = rng.random()
        if roll < 0.5:
            p = lin
        elif roll < 0.8:
            keep = lin.transformation[: max(1, len(lin.transformation) // 2)]
            p = SchemaLineage(lin.source_schema, frozenset("db." + t for t in lin.source_table),
                              keep, lin.aggregation)
        else:
            p = SchemaLineage(lin.source_schema, lin.source_table, lin.transformation, ())
        preds.append(PredictionRecord(task, _answer(p), "t1"))
    return gold, preds


def test_c12_throughput():
    config = load_config()
    gold, preds = synthetic_records(1700)
    start = time.perf_counter()
    trials = score_trials(gold, preds, config, jobs=1)
    elapsed = time.perf_counter() - start
    n = len(trials["t1"])
    record(12, n == 1700 and elapsed < 10.0, f"scored {n} synthetic records in {elapsed:.2f}s (serial)")


if __name__ == "__main__":
    import tempfile

    for name, fn in sorted(globals().items()):
        if name.startswith("test_c") and callable(fn):
            try:
                if "tmp_path" in fn.__code__.co_varnames[:fn.__code__.co_argcount]:
                    with tempfile.TemporaryDirectory() as d:
                        fn(Path(d))
                else:
                    fn()
            except AssertionError:
                pass
    print("\n".join(result_lines()))
    sys.exit(0 if RESULTS and all(ok for ok, _ in RESULTS.values()) else 1)
