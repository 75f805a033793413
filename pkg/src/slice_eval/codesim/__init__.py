"""Transformation and aggregation scoring: BLEU, weighted BLEU, multi-AST."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..matching import check_weights
from .ast_sim import SUPPORTED_LANGUAGES, UnsupportedLanguage, ast_similarity, subtree_bag
from .bleu import bleu, bleu_tokens, weighted_bleu
from .lexicon import (
    LanguageLexicon,
    default_lexicons,
    language_weights,
    load_lexicons,
)
from .tokens import join_field, tokenize_code


def multi_ast(pred, gold, lexicons=None) -> float:
    """Mixture of per-language AST similarities, weighted by the gold text's
    keyword attribution. Languages with zero weight are not parsed."""
    lexicons = default_lexicons() if lexicons is None else lexicons
    pred_text, gold_text = join_field(pred), join_field(gold)
    weights = language_weights(gold_text, lexicons)
    total = 0.0
    for lang, w in weights.items():
        if w > 0:
            total += w * ast_similarity(pred_text, gold_text, lang)
    return total


@dataclass(frozen=True)
class CodeScoreBreakdown:
    bleu: float
    weighted_bleu: float
    ast_multi: float
    language_weights: dict = field(default_factory=dict)
    combined: float = 0.0


def component_code_score(pred, gold, w1=0.5, w2=0.3, w3=0.2, lexicons=None) -> CodeScoreBreakdown:
    check_weights(w1, w2, w3, name="code weights")
    lexicons = default_lexicons() if lexicons is None else lexicons
    pred_text, gold_text = join_field(pred), join_field(gold)
    b = bleu(pred_text, gold_text)
    wb = weighted_bleu(pred_text, gold_text, lexicons)
    ast = multi_ast(pred_text, gold_text, lexicons)
    return CodeScoreBreakdown(
        b, wb, ast, language_weights(gold_text, lexicons), w1 * b + w2 * wb + w3 * ast
    )


__all__ = [
    "CodeScoreBreakdown", "LanguageLexicon", "SUPPORTED_LANGUAGES", "UnsupportedLanguage",
    "ast_similarity", "bleu", "bleu_tokens", "component_code_score", "default_lexicons",
    "join_field", "language_weights", "load_lexicons", "multi_ast", "subtree_bag",
    "tokenize_code", "weighted_bleu",
]
