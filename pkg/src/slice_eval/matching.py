"""Source-schema and source-table scoring."""
from __future__ import annotations

from dataclasses import dataclass
from typing import AbstractSet

from .kernels import best_match_means, similarity

WEIGHT_TOL = 1e-9


class InvalidWeights(ValueError):
    pass


def check_weights(*weights: float, name: str = "weights") -> None:
    if any(w < 0 for w in weights):
        raise InvalidWeights(f"{name} must be non-negative, got {weights}")
    if abs(sum(weights) - 1.0) > WEIGHT_TOL:
        raise InvalidWeights(f"{name} must sum to 1, got {sum(weights)!r}")


def source_schema_score(pred: AbstractSet[str], gold: AbstractSet[str]) -> int:
    return int(set(pred) == set(gold))


def exact_f1(pred: AbstractSet[str], gold: AbstractSet[str]) -> float:
    pred, gold = set(pred), set(gold)
    if not pred and not gold:
        return 1.0
    if not pred or not gold:
        return 0.0
    hits = len(pred & gold)
    if hits == 0:
        return 0.0
    p, r = hits / len(pred), hits / len(gold)
    return 2 * p * r / (p + r)


def fuzzy_match(a: str, b: str) -> float:
    """``1 - levenshtein(a, b) / max(len(a), len(b))``; two empty strings give 1."""
    return similarity(a, b)


def fuzzy_f(pred: AbstractSet[str], gold: AbstractSet[str]) -> float:
    if not pred and not gold:
        return 1.0
    if not pred or not gold:
        return 0.0
    # sorted so float summation order is reproducible
    precision, recall = best_match_means(sorted(pred), sorted(gold))
    return 0.5 * (precision + recall)


@dataclass(frozen=True)
class TableMatchBreakdown:
    exact_f1: float
    fuzzy_f: float
    combined: float


def table_score(pred, gold, w1: float = 0.7, w2: float = 0.3) -> TableMatchBreakdown:
    check_weights(w1, w2, name="table weights")
    f1 = exact_f1(pred, gold)
    fu = fuzzy_f(pred, gold)
    return TableMatchBreakdown(f1, fu, w1 * f1 + w2 * fu)
