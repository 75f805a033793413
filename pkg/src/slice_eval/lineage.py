"""Schema lineage records and their canonical text form.

A lineage has four fields: ``source_schema`` and ``source_table`` are sets,
``transformation`` and ``aggregation`` are ordered snippet sequences whose
text form uses ``<CODEEND>`` as separator.
"""
from __future__ import annotations

import ast
import json
from dataclasses import dataclass
from typing import Iterable

CODEEND = "<CODEEND>"
KEYS = ("source_schema", "source_table", "transformation", "aggregation")


class LineageError(ValueError):
    """Base class for lineage parsing failures."""


class MalformedDict(LineageError):
    pass


class KeySetMismatch(LineageError):
    pass


class InvalidLineage(LineageError):
    pass


def split_codeend(field_text: str) -> list[str]:
    return [p.strip() for p in field_text.split(CODEEND) if p.strip()]


def parse_schema_list(text: str) -> frozenset[str]:
    return frozenset(p.strip() for p in text.split(",") if p.strip())


def _split_outside_parens(text: str, seps: str) -> list[str]:
    parts, buf, depth = [], [], 0
    for ch in text:
        if ch in "([{":
            depth += 1
        elif ch in ")]}" and depth > 0:
            depth -= 1
        if depth == 0 and ch in seps:
            parts.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    parts.append("".join(buf))
    return parts


def parse_table_list(text: str) -> frozenset[str]:
    """Split on ``;`` and ``,`` that sit outside any bracket pair."""
    return frozenset(p.strip() for p in _split_outside_parens(text, ";,") if p.strip())


@dataclass(frozen=True)
class SchemaLineage:
    source_schema: frozenset[str] = frozenset()
    source_table: frozenset[str] = frozenset()
    transformation: tuple[str, ...] = ()
    aggregation: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "source_schema", frozenset(self.source_schema))
        object.__setattr__(self, "source_table", frozenset(self.source_table))
        object.__setattr__(self, "transformation", tuple(self.transformation))
        object.__setattr__(self, "aggregation", tuple(self.aggregation))
        problems = lineage_problems(self)
        if problems:
            raise InvalidLineage("; ".join(problems))

    @classmethod
    def from_fields(
        cls,
        source_schema: Iterable[str] = (),
        source_table: Iterable[str] = (),
        transformation: Iterable[str] = (),
        aggregation: Iterable[str] = (),
    ) -> "SchemaLineage":
        return cls(frozenset(source_schema), frozenset(source_table),
                   tuple(transformation), tuple(aggregation))

    def to_text_dict(self) -> dict[str, str]:
        return {
            "source_schema": ", ".join(sorted(self.source_schema)),
            "source_table": "; ".join(sorted(self.source_table)),
            "transformation": f" {CODEEND} ".join(self.transformation),
            "aggregation": f" {CODEEND} ".join(self.aggregation),
        }


def lineage_problems(lineage: SchemaLineage) -> list[str]:
    """Return invariant violations; an empty list means the value is valid."""
    out = []
    for name in KEYS:
        for item in getattr(lineage, name):
            if not isinstance(item, str):
                out.append(f"{name}: non-string element {item!r}")
            elif not item.strip():
                out.append(f"{name}: empty element")
            elif item != item.strip():
                out.append(f"{name}: element {item!r} has surrounding whitespace")
    for item in lineage.source_schema:
        if isinstance(item, str) and "," in item:
            out.append(f"source_schema: element {item!r} contains ','")
    for item in lineage.source_table:
        if isinstance(item, str) and len(_split_outside_parens(item, ";,")) > 1:
            out.append(f"source_table: element {item!r} contains a list separator")
    for name in ("transformation", "aggregation"):
        for i, item in enumerate(getattr(lineage, name)):
            if isinstance(item, str) and CODEEND in item:
                out.append(f"{name}[{i}]: snippet contains {CODEEND}")
    return out


def _reject_duplicate_keys(pairs):
    seen = {}
    for k, v in pairs:
        if k in seen:
            raise KeySetMismatch(f"duplicate key {k!r}")
        seen[k] = v
    return seen


def _load_object(text: str, lenient: bool) -> object:
    try:
        return json.loads(text, object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as exc:
        if not lenient:
            raise MalformedDict(f"not a JSON object: {exc.msg} at char {exc.pos}") from None
    # lenient: Python literal syntax covers single quotes and trailing commas
    try:
        return ast.literal_eval(text.strip())
    except (ValueError, SyntaxError, MemoryError, RecursionError) as exc:
        raise MalformedDict(f"not a dictionary literal: {exc}") from None


def lineage_from_mapping(obj: object) -> SchemaLineage:
    if not isinstance(obj, dict):
        raise MalformedDict(f"expected an object, got {type(obj).__name__}")
    keys = set(obj)
    if keys != set(KEYS):
        missing = sorted(set(KEYS) - keys)
        extra = sorted(str(k) for k in keys - set(KEYS))
        raise KeySetMismatch(f"missing keys {missing}, unexpected keys {extra}")
    for k in KEYS:
        if not isinstance(obj[k], str):
            raise MalformedDict(f"value of {k!r} must be a string")
    return SchemaLineage(
        parse_schema_list(obj["source_schema"]),
        parse_table_list(obj["source_table"]),
        tuple(split_codeend(obj["transformation"])),
        tuple(split_codeend(obj["aggregation"])),
    )


def parse_lineage_dict(text: str, lenient: bool = False) -> SchemaLineage:
    """Parse the four-key dictionary found between answer tags.

    Strict mode accepts JSON object syntax only. ``lenient=True`` also
    accepts Python-style literals (single quotes, trailing commas).
    """
    return lineage_from_mapping(_load_object(text, lenient))


def canonical_serialize(lineage: SchemaLineage) -> str:
    return json.dumps(lineage.to_text_dict(), ensure_ascii=False)


@dataclass(frozen=True)
class LineageTask:
    script_id: str
    target_schema: str

    @property
    def key(self) -> tuple[str, str]:
        return (self.script_id, self.target_schema)
