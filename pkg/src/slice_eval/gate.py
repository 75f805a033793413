"""Format gate: locate ``<think>``/``<answer>`` blocks and parse the answer."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .lineage import LineageError, SchemaLineage, parse_lineage_dict

THINK_OPEN, THINK_CLOSE = "<think>", "</think>"
ANSWER_OPEN, ANSWER_CLOSE = "<answer>", "</answer>"


class FormatViolation(ValueError):
    pass


class MissingTag(FormatViolation):
    pass


class DuplicateTag(FormatViolation):
    pass


class UnexpectedThinkBlock(FormatViolation):
    pass


class UnclosedTag(FormatViolation):
    pass


class EmptyThinkBlock(FormatViolation):
    pass


class MisorderedBlocks(FormatViolation):
    pass


def _block(raw: str, open_tag: str, close_tag: str) -> tuple[int, int]:
    n_open, n_close = raw.count(open_tag), raw.count(close_tag)
    if n_open == 0 and n_close == 0:
        raise MissingTag(f"no {open_tag} block")
    if n_open > 1 or n_close > 1:
        raise DuplicateTag(f"{open_tag} appears {n_open}x, {close_tag} {n_close}x")
    if n_open != n_close:
        raise UnclosedTag(f"unbalanced {open_tag}...{close_tag}")
    start = raw.index(open_tag) + len(open_tag)
    end = raw.index(close_tag)
    if end < start:
        raise UnclosedTag(f"{close_tag} precedes {open_tag}")
    return start, end


def extract_blocks(raw: str, reasoning: bool) -> tuple[Optional[str], str]:
    """Return ``(think, answer)`` inner texts or raise a FormatViolation.

    In answer-only mode any think tag is a violation. In reasoning mode the
    think block must be non-empty and close before the answer block opens.
    """
    has_think = THINK_OPEN in raw or THINK_CLOSE in raw
    if not reasoning and has_think:
        raise UnexpectedThinkBlock("think block present in answer-only mode")
    a_start, a_end = _block(raw, ANSWER_OPEN, ANSWER_CLOSE)
    if not reasoning:
        return None, raw[a_start:a_end]
    t_start, t_end = _block(raw, THINK_OPEN, THINK_CLOSE)
    if t_end + len(THINK_CLOSE) > a_start - len(ANSWER_OPEN):
        raise MisorderedBlocks("think block must close before the answer block opens")
    think = raw[t_start:t_end]
    if not think.strip():
        raise EmptyThinkBlock("empty think block")
    return think, raw[a_start:a_end]


@dataclass(frozen=True)
class ModelResponse:
    raw: str
    reasoning: bool
    think_block: Optional[str] = None
    answer_block: Optional[str] = None
    format_ok: int = 0
    lineage: Optional[SchemaLineage] = None
    reason: str = ""


def gate_response(raw: str, reasoning: bool = False, lenient: bool = False) -> ModelResponse:
    try:
        think, answer = extract_blocks(raw, reasoning)
    except FormatViolation as exc:
        return ModelResponse(raw, reasoning, reason=f"{type(exc).__name__}: {exc}")
    try:
        lineage = parse_lineage_dict(answer.strip(), lenient=lenient)
    except LineageError as exc:
        return ModelResponse(raw, reasoning, think, answer,
                             reason=f"{type(exc).__name__}: {exc}")
    return ModelResponse(raw, reasoning, think, answer, 1, lineage)


def format_score(raw: str, reasoning: bool = False, lenient: bool = False):
    """Binary format score plus the parsed lineage (or ``None``)."""
    resp = gate_response(raw, reasoning, lenient)
    return resp.format_ok, resp.lineage


def wrap_answer(answer_text: str, think: Optional[str] = None) -> str:
    body = f"{ANSWER_OPEN} {answer_text} {ANSWER_CLOSE}"
    if think is None:
        return body
    return f"{THINK_OPEN}{think}{THINK_CLOSE}\n{body}"
