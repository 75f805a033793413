"""Composite lineage score and its script/corpus/trial aggregation."""
from __future__ import annotations

import math
import statistics
from collections import defaultdict
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import yaml

from .codesim import component_code_score, default_lexicons, load_lexicons
from .gate import ModelResponse, gate_response
from .lineage import LineageTask, SchemaLineage
from .matching import InvalidWeights, check_weights, source_schema_score, table_score

LEVELS = ("easy", "medium", "hard")


class ConfigError(ValueError):
    pass


class EmptyScript(ValueError):
    pass


class EmptyCorpus(ValueError):
    pass


class UnlabeledScript(ValueError):
    pass


_CONFIG_KEYS = {
    "weights.table": ("exact_f1", "fuzzy_f"),
    "weights.transformation": ("bleu", "weighted_bleu", "ast_multi"),
    "weights.aggregation": ("bleu", "weighted_bleu", "ast_multi"),
    "weights.composite": ("table", "transformation", "aggregation"),
    "mode": ("reasoning", "lenient"),
}


@dataclass(frozen=True)
class EvaluationConfig:
    w1_tbl: float = 0.7
    w2_tbl: float = 0.3
    w1_trf: float = 0.5
    w2_trf: float = 0.3
    w3_trf: float = 0.2
    w1_agg: float = 0.5
    w2_agg: float = 0.3
    w3_agg: float = 0.2
    omega_tbl: float = 0.4
    omega_trf: float = 0.4
    omega_agg: float = 0.2
    reasoning: bool = False
    lenient: bool = False
    lexicons_path: Optional[str] = None
    lexicons: tuple = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        try:
            check_weights(self.w1_tbl, self.w2_tbl, name="table weights")
            check_weights(self.w1_trf, self.w2_trf, self.w3_trf, name="transformation weights")
            check_weights(self.w1_agg, self.w2_agg, self.w3_agg, name="aggregation weights")
            check_weights(self.omega_tbl, self.omega_trf, self.omega_agg, name="composite weights")
        except InvalidWeights as exc:
            raise ConfigError(str(exc)) from None
        if self.lexicons is None:
            lex = default_lexicons() if self.lexicons_path is None else load_lexicons(self.lexicons_path)
            object.__setattr__(self, "lexicons", lex)

    def weights_dict(self) -> dict:
        return {
            "table": {"exact_f1": self.w1_tbl, "fuzzy_f": self.w2_tbl},
            "transformation": {"bleu": self.w1_trf, "weighted_bleu": self.w2_trf,
                               "ast_multi": self.w3_trf},
            "aggregation": {"bleu": self.w1_agg, "weighted_bleu": self.w2_agg,
                            "ast_multi": self.w3_agg},
            "composite": {"table": self.omega_tbl, "transformation": self.omega_trf,
                          "aggregation": self.omega_agg},
        }

    def to_dict(self) -> dict:
        return {
            "weights": self.weights_dict(),
            "mode": {"reasoning": self.reasoning, "lenient": self.lenient},
            "lexicons": self.lexicons_path,
        }

    @classmethod
    def from_mapping(cls, data: Mapping, base_dir: Optional[Path] = None) -> "EvaluationConfig":
        if not isinstance(data, Mapping):
            raise ConfigError("config must be a mapping")

        def section(dotted):
            node = data
            for part in dotted.split("."):
                if not isinstance(node, Mapping) or part not in node:
                    raise ConfigError(f"missing config key: {dotted}")
                node = node[part]
            return node

        values = {}
        for dotted, keys in _CONFIG_KEYS.items():
            sec = section(dotted)
            for k in keys:
                if not isinstance(sec, Mapping) or k not in sec:
                    raise ConfigError(f"missing config key: {dotted}.{k}")
                values[f"{dotted}.{k}"] = sec[k]
        if "lexicons" not in data:
            raise ConfigError("missing config key: lexicons")
        lex_path = data["lexicons"]
        if lex_path is not None and base_dir is not None:
            lex_path = str((base_dir / lex_path).resolve())
        for key, v in values.items():
            if key.startswith("weights.") and (isinstance(v, bool) or not isinstance(v, (int, float))):
                raise ConfigError(f"config key {key} must be a number, got {v!r}")
        v = values
        return cls(
            w1_tbl=float(v["weights.table.exact_f1"]), w2_tbl=float(v["weights.table.fuzzy_f"]),
            w1_trf=float(v["weights.transformation.bleu"]),
            w2_trf=float(v["weights.transformation.weighted_bleu"]),
            w3_trf=float(v["weights.transformation.ast_multi"]),
            w1_agg=float(v["weights.aggregation.bleu"]),
            w2_agg=float(v["weights.aggregation.weighted_bleu"]),
            w3_agg=float(v["weights.aggregation.ast_multi"]),
            omega_tbl=float(v["weights.composite.table"]),
            omega_trf=float(v["weights.composite.transformation"]),
            omega_agg=float(v["weights.composite.aggregation"]),
            reasoning=bool(v["mode.reasoning"]), lenient=bool(v["mode.lenient"]),
            lexicons_path=lex_path,
        )


def load_config(path: Optional[str | Path] = None) -> EvaluationConfig:
    """Load a YAML config; ``None`` gives the shipped defaults."""
    if path is None:
        text = resources.files("slice_eval.data").joinpath("default_config.yaml").read_text("utf-8")
        return EvaluationConfig.from_mapping(yaml.safe_load(text))
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text("utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    return EvaluationConfig.from_mapping(data, base_dir=path.parent)


@dataclass(frozen=True)
class ScoredRecord:
    task: LineageTask
    m_fmt: int
    m_src: int
    m_tbl: float
    m_trf: float
    m_agg: float
    slice: float
    diagnostics: tuple[str, ...] = ()
    trial_id: str = ""


def composite(m_fmt: int, m_src: int, m_tbl: float, m_trf: float, m_agg: float,
              config: EvaluationConfig) -> float:
    inner = math.fsum((config.omega_tbl * m_tbl, config.omega_trf * m_trf,
                       config.omega_agg * m_agg))
    return m_fmt * m_src * inner


def score_lineages(pred: SchemaLineage, gold: SchemaLineage, config: EvaluationConfig):
    """Component scores ``(m_src, m_tbl, m_trf, m_agg)`` for two parsed lineages."""
    m_src = source_schema_score(pred.source_schema, gold.source_schema)
    m_tbl = table_score(pred.source_table, gold.source_table, config.w1_tbl, config.w2_tbl).combined
    m_trf = component_code_score(pred.transformation, gold.transformation,
                                 config.w1_trf, config.w2_trf, config.w3_trf,
                                 config.lexicons).combined
    m_agg = component_code_score(pred.aggregation, gold.aggregation,
                                 config.w1_agg, config.w2_agg, config.w3_agg,
                                 config.lexicons).combined
    return m_src, m_tbl, m_trf, m_agg


def slice_score(response: ModelResponse | str, gold: SchemaLineage, config: EvaluationConfig,
                task: Optional[LineageTask] = None, trial_id: str = "") -> ScoredRecord:
    """Score one response against its gold lineage.

    A raw string is gated with the config's mode first. When the format gate
    fails no lineage exists, so the content components are reported as 0.
    """
    if isinstance(response, str):
        response = gate_response(response, config.reasoning, config.lenient)
    task = task or LineageTask("", "")
    diagnostics = []
    if response.lineage is None:
        diagnostics.append(f"format: {response.reason}")
        return ScoredRecord(task, 0, 0, 0.0, 0.0, 0.0, 0.0, tuple(diagnostics), trial_id)
    m_src, m_tbl, m_trf, m_agg = score_lineages(response.lineage, gold, config)
    if not m_src:
        diagnostics.append("source_schema: set mismatch")
    m_fmt = response.format_ok
    value = composite(m_fmt, m_src, m_tbl, m_trf, m_agg, config)
    return ScoredRecord(task, m_fmt, m_src, m_tbl, m_trf, m_agg, value, tuple(diagnostics), trial_id)


def script_score(records: Sequence[ScoredRecord]) -> tuple[float, int]:
    """Mean slice over one script's records and the record count."""
    if not records:
        raise EmptyScript("no records for script")
    ids = {r.task.script_id for r in records}
    if len(ids) != 1:
        raise ValueError(f"records span several scripts: {sorted(ids)}")
    return math.fsum(r.slice for r in records) / len(records), len(records)


def corpus_score(script_scores: Iterable[float]) -> float:
    values = list(script_scores)
    if not values:
        raise EmptyCorpus("no scripts to average")
    return math.fsum(values) / len(values)


def per_script_scores(records: Iterable[ScoredRecord]) -> dict[str, tuple[float, int]]:
    groups = defaultdict(list)
    for r in records:
        groups[r.task.script_id].append(r)
    return {sid: script_score(groups[sid]) for sid in sorted(groups)}


def stratify(script_scores: Mapping[str, float], labels: Mapping[str, str]) -> dict[str, float]:
    """Mean script score per difficulty level; levels with no scripts are omitted."""
    groups = defaultdict(list)
    for sid, value in script_scores.items():
        level = labels.get(sid)
        if level not in LEVELS:
            raise UnlabeledScript(f"script {sid!r} has no valid difficulty label ({level!r})")
        groups[level].append(value)
    return {lvl: math.fsum(groups[lvl]) / len(groups[lvl]) for lvl in LEVELS if lvl in groups}


def trial_stats(corpus_scores: Sequence[float]) -> tuple[float, float]:
    """Mean and population standard deviation across trials."""
    values = list(corpus_scores)
    if not values:
        raise EmptyCorpus("no trials")
    mean = math.fsum(values) / len(values)
    if len(values) == 1:
        return mean, 0.0
    return mean, statistics.pstdev(values)
