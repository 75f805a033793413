"""Prompt construction for base, few-shot and chain-of-thought strategies."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .corpus import PipelineScript, WorkedExample

STRATEGIES = ("base", "one-shot", "two-shot", "three-shot", "cot-1", "cot-2", "cot-3")
_ARITY = {"base": 0, "one-shot": 1, "two-shot": 2, "three-shot": 3, "cot-1": 1, "cot-2": 2, "cot-3": 3}
# examples allowed per difficulty level
EXAMPLE_CAP = {"easy": 1, "medium": 2, "hard": 3}


class ArityMismatch(ValueError):
    pass


def strategy_arity(strategy: str) -> int:
    try:
        return _ARITY[strategy]
    except KeyError:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}") from None


def is_reasoning(strategy: str) -> bool:
    strategy_arity(strategy)
    return strategy.startswith("cot")


def effective_arity(strategy: str, difficulty: str) -> int:
    """Example count actually used: the strategy's count capped by script difficulty."""
    return min(strategy_arity(strategy), EXAMPLE_CAP[difficulty])


_HEADER = (
    "You are a data lineage analysis assistant. Your task is to analyze the provided data "
    "generation script and trace the lineage of a specific column which is specified by the user."
)

_ANSWER_ONLY = """Your response must include <answer> </answer> part:
<answer> {
  "source_schema": "...",
  "source_table": "...",
  "transformation": "...",
  "aggregation": "..."
} </answer>."""

_TWO_PART = """Your response must include two parts:
1. <think> ... </think>
2. <answer> {
  "source_schema": "...",
  "source_table": "...",
  "transformation": "...",
  "aggregation": "..."
} </answer>."""

# Field definitions below are our own wording; the surrounding text is fixed.
_INSTRUCTIONS = """Field definitions:
- "source_schema": comma-separated names of the original source columns that the target column is derived from.
- "source_table": semicolon-separated identifiers (table names or storage paths) of the primary data origins.
- "transformation": every transformation that influences the target column, as code copied from the script, in order, separated by <CODEEND>.
- "aggregation": the aggregation or pivot operations applied to the target column, separated by <CODEEND>; use "" when there is none.
Use exactly these four keys and string values only. Do not add text inside the answer block outside the dictionary."""


def render_answer(lineage) -> str:
    return "<answer> " + json.dumps(lineage.to_text_dict(), ensure_ascii=False) + " </answer>"


def render_example(example: WorkedExample, with_trace: bool) -> str:
    parts = [f"Target column: {example.target_schema}"]
    if with_trace:
        parts.append(f"<think> {example.trace.strip()} </think>")
    parts.append(render_answer(example.lineage))
    return "\n".join(parts)


@dataclass(frozen=True)
class PromptSpec:
    strategy: str
    script: PipelineScript
    examples: Sequence[WorkedExample] = ()

    def __post_init__(self):
        n = strategy_arity(self.strategy)
        if len(self.examples) != n:
            raise ArityMismatch(f"{self.strategy} needs {n} example(s), got {len(self.examples)}")
        if is_reasoning(self.strategy):
            missing = [e.target_schema for e in self.examples if not (e.trace or "").strip()]
            if missing:
                raise ArityMismatch(f"{self.strategy} needs a reasoning trace for every example; "
                                    f"missing for {missing}")


def build_prompt(spec: PromptSpec) -> str:
    """Render the shared per-script prompt (everything except the column query)."""
    cot = is_reasoning(spec.strategy)
    blocks = [_HEADER, _TWO_PART if cot else _ANSWER_ONLY, _INSTRUCTIONS,
              f"Data Pipeline Script: {spec.script.text}"]
    if spec.examples:
        rendered = "\n\n".join(
            f"Example {i}:\n{render_example(ex, cot)}" for i, ex in enumerate(spec.examples, 1))
        blocks.append(f"Examples: {rendered}")
    return "\n\n".join(blocks) + "\n"


def task_query(target_schema: str) -> str:
    return f"Trace the lineage of the column: {target_schema}"


def spec_for_script(strategy: str, script: PipelineScript, pool: Sequence[WorkedExample],
                    difficulty: str) -> PromptSpec:
    """Pick the first ``effective_arity`` examples from the script's pool."""
    k = effective_arity(strategy, difficulty)
    if len(pool) < k:
        raise ArityMismatch(f"{script.script_id}: {strategy} on a {difficulty} script needs "
                            f"{k} example(s), pool has {len(pool)}")
    # PromptSpec checks against the nominal arity; pass the capped count through a
    # strategy of matching size within the same family.
    family = "cot" if is_reasoning(strategy) else "shot"
    names = {("shot", 0): "base", ("shot", 1): "one-shot", ("shot", 2): "two-shot",
             ("shot", 3): "three-shot", ("cot", 1): "cot-1", ("cot", 2): "cot-2", ("cot", 3): "cot-3"}
    return PromptSpec(names[(family, k)], script, tuple(pool[:k]))
