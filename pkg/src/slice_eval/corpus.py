"""Pipeline scripts, difficulty labels, and gold/prediction record files."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import yaml

from .lineage import (
    LineageError,
    LineageTask,
    SchemaLineage,
    lineage_from_mapping,
    lineage_problems,
    split_codeend,
    parse_schema_list,
    parse_table_list,
)

SEGMENT_DELIMITER = ">>>>>"
_DELIM_LINE = re.compile(r"^[ \t]*>>>>>[ \t]*$", re.MULTILINE)


class CorpusError(ValueError):
    pass


class EmptyScript(CorpusError):
    pass


class MissingFeatures(CorpusError):
    pass


class MalformedRecord(CorpusError):
    def __init__(self, path, line_no: int, message: str):
        self.path, self.line_no = str(path), line_no
        super().__init__(f"{path}:{line_no}: {message}")


class DuplicateGoldTask(MalformedRecord):
    pass


@dataclass(frozen=True)
class ScriptFeatures:
    source_count: int
    has_transformation_chain: bool
    has_aggregation: bool


@dataclass(frozen=True)
class PipelineScript:
    script_id: str
    segments: tuple[str, ...]
    languages: tuple[Optional[str], ...] = ()
    features: Optional[ScriptFeatures] = None
    difficulty: Optional[str] = None

    @property
    def text(self) -> str:
        return f"\n\n{SEGMENT_DELIMITER}\n\n".join(self.segments)


def parse_multilang_script(raw: str, script_id: str = "") -> PipelineScript:
    """Split ``raw`` on lines that contain only ``>>>>>``."""
    segments = tuple(s.strip() for s in _DELIM_LINE.split(raw) if s.strip())
    if not segments:
        raise EmptyScript(f"script {script_id!r} has no code")
    return PipelineScript(script_id, segments)


def difficulty_score(features: ScriptFeatures) -> int:
    return int(features.source_count >= 3) + int(features.has_transformation_chain) \
        + int(features.has_aggregation)


def difficulty_level(features: Optional[ScriptFeatures]) -> str:
    if features is None:
        raise MissingFeatures("difficulty needs declared or detected features")
    score = difficulty_score(features)
    return "easy" if score <= 1 else ("medium" if score == 2 else "hard")


# --- heuristic feature detection ---------------------------------------

_LOAD_CALL = re.compile(
    r"""\.(?:load|parquet|csv|json|table|read_csv|read_parquet|read_sql)\(\s*(['"])(.+?)\1""")
_READ_CALL = re.compile(r"\b(?:spark\.read|pd\.read_\w+|read_csv|read_parquet|spark\.table)\b")
_WRITE_CALL = re.compile(r"""\.(?:write\b.*?\.(?:parquet|csv|save|saveAsTable)|to_csv|to_parquet)\(\s*([\w'"./:@-]+)""")
_DEST_TABLE = re.compile(r'DestinationTableName\s*=\s*"([^"]+)"')
_STRING_ASSIGN = re.compile(r"""^\s*(\w+)\s*=\s*(['"])(.+?)\2\s*$""", re.MULTILINE)
_SQL_SOURCE = re.compile(r"\b(?:FROM|JOIN)\s+([\w.\[\]`\"]+)(?![\w.\[\]`\"])(?!\s+import\b)",
                         re.IGNORECASE)
_SQL_TARGET = re.compile(r"\b(?:INSERT\s+INTO|CREATE\s+(?:OR\s+REPLACE\s+)?(?:TEMP(?:ORARY)?\s+)?(?:TABLE|VIEW)|INTO)\s+([\w.\[\]`\"]+)", re.IGNORECASE)
_CTE = re.compile(r"(?:\bWITH|,)\s*(\w+)\s+AS\s*\(", re.IGNORECASE)
_SUBQUERY = re.compile(r"\(\s*SELECT\b", re.IGNORECASE)
_PY_ASSIGN = re.compile(r"^[ \t]*(\w+)\s*=(?!=)\s*(.+?)(?=^[ \t]*\w+\s*=(?!=)|^[ \t]*(?:def|return|if|for|print)\b|\Z)",
                        re.MULTILINE | re.DOTALL)
_METHOD_CHAIN = re.compile(r"\)\s*(?:\\\s*)?\.\s*\w+\s*\(")
_AGGREGATE = re.compile(
    r"\b(?:SUM|COUNT|AVG|MIN|MAX|PIVOT|STDEV|STDDEV|STRING_AGG|LISTAGG|ARRAY_AGG|countDistinct"
    r"|collect_list)\s*\(|\.(?:groupBy|groupby|agg|pivot|pivot_table)\s*\(|\bGROUP\s+BY\b",
    re.IGNORECASE,
)


def _stem(name: str) -> str:
    name = name.strip("'\"`[]").rstrip("/")
    base = re.split(r"[/.]", name)
    parts = [p for p in base if p and p.lower() not in {"parquet", "csv", "json", "delta"}]
    return parts[-1].lower() if parts else name.lower()


def detect_features(script: PipelineScript) -> ScriptFeatures:
    """Advisory scan for the three difficulty factors.

    Sources are distinct load targets plus SQL FROM/JOIN tables that are not
    produced earlier in the script (writes, CTEs, INSERT/CREATE targets).
    """
    text = "\n".join(script.segments)
    string_vars = {m.group(1): m.group(3) for m in _STRING_ASSIGN.finditer(text)}

    no_writes = "\n".join(ln for ln in text.splitlines() if ".write" not in ln)
    sources: set[str] = set()
    for m in _LOAD_CALL.finditer(no_writes):
        sources.add(m.group(2))
    produced: set[str] = set()
    for m in _WRITE_CALL.finditer(text):
        target = m.group(1).strip("'\"")
        produced.add(_stem(string_vars.get(target, target)))
    for m in _SQL_TARGET.finditer(text):
        produced.add(_stem(m.group(1)))
    for m in _DEST_TABLE.finditer(text):
        produced.add(_stem(m.group(1)))
    ctes = {c.lower() for c in _CTE.findall(text)}
    for m in _SQL_SOURCE.finditer(text):
        name = m.group(1)
        if name.startswith("("):
            continue
        stem = _stem(name)
        if stem in ctes or stem in produced:
            continue
        sources.add(stem)

    chain = bool(ctes) or bool(_SUBQUERY.search(text)) or bool(_METHOD_CHAIN.search(no_writes))
    if not chain:
        # an intermediate produced by a transformation (not a read) used by a later statement
        derived: list[str] = []
        for m in _PY_ASSIGN.finditer(text):
            name, rhs = m.group(1), m.group(2)
            if any(re.search(rf"\b{re.escape(d)}\b", rhs) for d in derived):
                chain = True
                break
            if "(" in rhs and not _READ_CALL.search(rhs) and not _LOAD_CALL.search(rhs):
                derived.append(name)
        if not chain:
            # SQL: a table written by one statement and read by a later one
            for m in _SQL_SOURCE.finditer(text):
                if _stem(m.group(1)) in produced and any(
                    t.start() < m.start() for t in _SQL_TARGET.finditer(text)
                    if _stem(t.group(1)) == _stem(m.group(1))
                ):
                    chain = True
                    break
    aggregation = bool(_AGGREGATE.search(text))
    return ScriptFeatures(len(sources), chain, aggregation)


# --- record files ------------------------------------------------------

@dataclass(frozen=True)
class GoldRecord:
    task: LineageTask
    lineage: SchemaLineage

    def to_json(self) -> str:
        return json.dumps({
            "script_id": self.task.script_id,
            "target_schema": self.task.target_schema,
            "lineage": self.lineage.to_text_dict(),
        }, ensure_ascii=False)


@dataclass(frozen=True)
class PredictionRecord:
    task: LineageTask
    raw_response: str
    trial_id: str
    seed: Optional[int] = None
    note: str = ""

    def to_json(self) -> str:
        obj = {
            "script_id": self.task.script_id,
            "target_schema": self.task.target_schema,
            "trial_id": self.trial_id,
            "raw_response": self.raw_response,
        }
        if self.seed is not None:
            obj["seed"] = self.seed
        if self.note:
            obj["note"] = self.note
        return json.dumps(obj, ensure_ascii=False)


def _json_lines(path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(path, line_no, f"invalid JSON: {exc.msg}") from None
            if not isinstance(obj, dict):
                raise MalformedRecord(path, line_no, "record must be an object")
            yield line_no, obj


def _task(path, line_no, obj) -> LineageTask:
    for key in ("script_id", "target_schema"):
        if not isinstance(obj.get(key), str) or not obj[key]:
            raise MalformedRecord(path, line_no, f"missing or empty field {key!r}")
    return LineageTask(obj["script_id"], obj["target_schema"])


def lineage_from_record(raw: object) -> SchemaLineage:
    if isinstance(raw, dict) and any(isinstance(v, list) for v in raw.values()):
        fields = {}
        parsers = {"source_schema": parse_schema_list, "source_table": parse_table_list,
                   "transformation": split_codeend, "aggregation": split_codeend}
        for key, parse in parsers.items():
            if key not in raw:
                return lineage_from_mapping(raw)  # raises KeySetMismatch
            v = raw[key]
            fields[key] = [str(x) for x in v] if isinstance(v, list) else list(parse(v))
        if set(raw) != set(parsers):
            return lineage_from_mapping(raw)
        return SchemaLineage.from_fields(**fields)
    return lineage_from_mapping(raw)


def iter_gold(path) -> Iterator[tuple[int, GoldRecord]]:
    seen: dict[tuple[str, str], int] = {}
    for line_no, obj in _json_lines(path):
        task = _task(path, line_no, obj)
        if "lineage" not in obj:
            raise MalformedRecord(path, line_no, "missing field 'lineage'")
        try:
            lineage = lineage_from_record(obj["lineage"])
        except LineageError as exc:
            raise MalformedRecord(path, line_no, f"invalid lineage: {exc}") from None
        if task.key in seen:
            raise DuplicateGoldTask(path, line_no,
                                    f"duplicate task {task.key} (first on line {seen[task.key]})")
        seen[task.key] = line_no
        yield line_no, GoldRecord(task, lineage)


def load_gold(path) -> list[GoldRecord]:
    return [rec for _, rec in iter_gold(path)]


def load_predictions(path) -> list[PredictionRecord]:
    out = []
    for line_no, obj in _json_lines(path):
        task = _task(path, line_no, obj)
        trial = obj.get("trial_id")
        raw = obj.get("raw_response")
        if not isinstance(trial, str) or not trial:
            raise MalformedRecord(path, line_no, "missing or empty field 'trial_id'")
        if not isinstance(raw, str):
            raise MalformedRecord(path, line_no, "field 'raw_response' must be a string")
        seed = obj.get("seed")
        out.append(PredictionRecord(task, raw, trial, seed if isinstance(seed, int) else None,
                                    str(obj.get("note", ""))))
    return out


def write_records(path, records) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


# --- manifest ----------------------------------------------------------

@dataclass(frozen=True)
class WorkedExample:
    target_schema: str
    lineage: SchemaLineage
    trace: Optional[str] = None


@dataclass(frozen=True)
class CorpusEntry:
    script: PipelineScript
    path: Path
    examples: tuple[WorkedExample, ...] = ()


@dataclass
class Corpus:
    root: Path
    entries: dict[str, CorpusEntry] = field(default_factory=dict)

    def labels(self) -> dict[str, str]:
        return {sid: script_difficulty(e.script) for sid, e in self.entries.items()}


def script_difficulty(script: PipelineScript) -> str:
    """Declared label, else the label implied by declared features."""
    if script.difficulty is not None:
        return script.difficulty
    return difficulty_level(script.features)


def load_corpus(manifest_path) -> Corpus:
    """Load a script manifest (YAML). Declared metadata is authoritative."""
    manifest_path = Path(manifest_path)
    try:
        data = yaml.safe_load(manifest_path.read_text("utf-8"))
    except yaml.YAMLError as exc:
        raise CorpusError(f"{manifest_path}: invalid YAML: {exc}") from None
    if not isinstance(data, dict) or not isinstance(data.get("scripts"), list):
        raise CorpusError(f"{manifest_path}: expected a 'scripts' list")
    corpus = Corpus(manifest_path.parent)
    for i, item in enumerate(data["scripts"]):
        try:
            sid = item["script_id"]
            path = manifest_path.parent / item["path"]
        except (KeyError, TypeError):
            raise CorpusError(f"{manifest_path}: scripts[{i}] needs script_id and path") from None
        script = parse_multilang_script(path.read_text("utf-8"), sid)
        feats = item.get("features")
        features = None
        if feats is not None:
            try:
                features = ScriptFeatures(int(feats["source_count"]),
                                          bool(feats["has_transformation_chain"]),
                                          bool(feats["has_aggregation"]))
            except (KeyError, TypeError, ValueError):
                raise CorpusError(f"{manifest_path}: scripts[{i}].features incomplete") from None
        difficulty = item.get("difficulty")
        if difficulty is not None and difficulty not in ("easy", "medium", "hard"):
            raise CorpusError(f"{manifest_path}: scripts[{i}] has unknown difficulty {difficulty!r}")
        langs = tuple(item.get("languages") or ())
        if langs and len(langs) != len(script.segments):
            raise CorpusError(f"{manifest_path}: scripts[{i}] lists {len(langs)} languages "
                              f"for {len(script.segments)} segments")
        examples = []
        for ex in item.get("examples") or ():
            try:
                lineage = lineage_from_record(ex["lineage"])
            except (KeyError, TypeError, LineageError) as exc:
                raise CorpusError(f"{manifest_path}: scripts[{i}] bad example: {exc}") from None
            examples.append(WorkedExample(ex["target_schema"], lineage, ex.get("trace")))
        script = PipelineScript(sid, script.segments, langs, features, difficulty)
        corpus.entries[sid] = CorpusEntry(script, path, tuple(examples))
    return corpus


def validate_gold(path) -> list[tuple[int, str]]:
    """Collect every per-line problem in a gold file instead of stopping at the first."""
    from types import SimpleNamespace

    findings: list[tuple[int, str]] = []
    seen: dict[tuple[str, str], int] = {}
    parsers = {"source_schema": parse_schema_list, "source_table": parse_table_list,
               "transformation": split_codeend, "aggregation": split_codeend}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                findings.append((line_no, f"invalid JSON: {exc.msg}"))
                continue
            if not isinstance(obj, dict):
                findings.append((line_no, "record must be an object"))
                continue
            for key in ("script_id", "target_schema"):
                if not isinstance(obj.get(key), str) or not obj.get(key):
                    findings.append((line_no, f"missing or empty field {key!r}"))
            lin = obj.get("lineage")
            if not isinstance(lin, dict):
                findings.append((line_no, "missing or non-object 'lineage'"))
            elif set(lin) != set(parsers):
                findings.append((line_no, f"lineage keys {sorted(lin)} != {sorted(parsers)}"))
            else:
                fields = {}
                for key, parse in parsers.items():
                    v = lin[key]
                    if isinstance(v, list):
                        fields[key] = v
                    elif isinstance(v, str):
                        fields[key] = list(parse(v))
                    else:
                        findings.append((line_no, f"{key}: value must be a string or list"))
                        fields[key] = []
                for msg in lineage_problems(SimpleNamespace(**fields)):
                    findings.append((line_no, msg))
            key = (obj.get("script_id"), obj.get("target_schema"))
            if all(isinstance(k, str) and k for k in key):
                if key in seen:
                    findings.append((line_no, f"duplicate task {key} (first on line {seen[key]})"))
                else:
                    seen[key] = line_no
    return findings
