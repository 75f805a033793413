"""Keyword lexicons and keyword-based language attribution."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import yaml

from .tokens import tokenize_code


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class LanguageLexicon:
    language: str
    keywords: frozenset
    case_sensitive: bool

    def __post_init__(self):
        if not self.keywords:
            raise LexiconError(f"lexicon {self.language!r} has no keywords")
        if not self.case_sensitive:
            object.__setattr__(self, "keywords", frozenset(k.upper() for k in self.keywords))

    def __contains__(self, token: str) -> bool:
        if self.case_sensitive:
            return token in self.keywords
        return token.upper() in self.keywords


def lexicons_from_mapping(data: Mapping) -> tuple[LanguageLexicon, ...]:
    try:
        entries = data["languages"]
        out = tuple(
            LanguageLexicon(
                language=str(e["name"]),
                keywords=frozenset(str(k) for k in e["keywords"]),
                case_sensitive=bool(e["case_sensitive"]),
            )
            for e in entries
        )
    except (KeyError, TypeError) as exc:
        raise LexiconError(f"malformed lexicon config: missing {exc}") from None
    names = [lx.language for lx in out]
    if not out or len(set(names)) != len(names):
        raise LexiconError(f"lexicon config needs distinct languages, got {names}")
    return out


def load_lexicons(path: Optional[str | Path] = None) -> tuple[LanguageLexicon, ...]:
    if path is None:
        text = resources.files("slice_eval.data").joinpath("lexicons.yaml").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return lexicons_from_mapping(yaml.safe_load(text))


_DEFAULT: Optional[tuple[LanguageLexicon, ...]] = None


def default_lexicons() -> tuple[LanguageLexicon, ...]:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_lexicons()
    return _DEFAULT


def is_keyword(token: str, lexicons: Iterable[LanguageLexicon]) -> bool:
    return any(token in lx for lx in lexicons)


def language_weights(text: str | Sequence[str], lexicons=None) -> dict[str, float]:
    """Share of keyword hits per language; uniform when nothing matches.

    A token that belongs to several lexicons counts once for each.
    """
    lexicons = default_lexicons() if lexicons is None else lexicons
    tokens = tokenize_code(text) if isinstance(text, str) else list(text)
    hits = {lx.language: 0 for lx in lexicons}
    for tok in tokens:
        for lx in lexicons:
            if tok in lx:
                hits[lx.language] += 1
    total = sum(hits.values())
    if total == 0:
        return {name: 1.0 / len(hits) for name in hits}
    return {name: n / total for name, n in hits.items()}
