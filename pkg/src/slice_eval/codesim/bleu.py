"""BLEU and keyword-weighted BLEU over code token streams."""
from __future__ import annotations

import math
from collections import Counter
from typing import Sequence

from .lexicon import default_lexicons, is_keyword
from .tokens import join_field, tokenize_code

MAX_ORDER = 4
KEYWORD_WEIGHT = 5.0


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu_tokens(pred: Sequence[str], gold: Sequence[str], unigram_weights=None) -> float:
    """Single-pair BLEU with order ``min(4, len(gold))`` and no smoothing.

    ``unigram_weights`` maps a token to its weight in the unigram precision;
    higher orders are always unweighted.
    """
    if not pred and not gold:
        return 1.0
    if not pred or not gold:
        return 0.0
    order = min(MAX_ORDER, len(gold))
    log_sum = 0.0
    for n in range(1, order + 1):
        pc, gc = _ngrams(pred, n), _ngrams(gold, n)
        if not pc:
            return 0.0
        if n == 1 and unigram_weights is not None:
            num = den = 0.0
            for g, c in pc.items():
                w = unigram_weights(g[0])
                num += min(c, gc[g]) * w
                den += c * w
        else:
            num = sum(min(c, gc[g]) for g, c in pc.items())
            den = sum(pc.values())
        if num == 0:
            return 0.0
        log_sum += math.log(num / den)
    c, r = len(pred), len(gold)
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    return bp * math.exp(log_sum / order)


def _field_tokens(x) -> list[str]:
    return tokenize_code(join_field(x))


def bleu(pred, gold) -> float:
    """BLEU between two fields (snippet sequences or already-joined text)."""
    return bleu_tokens(_field_tokens(pred), _field_tokens(gold))


def weighted_bleu(pred, gold, lexicons=None) -> float:
    lexicons = default_lexicons() if lexicons is None else lexicons

    def weight(tok: str) -> float:
        return KEYWORD_WEIGHT if is_keyword(tok, lexicons) else 1.0

    return bleu_tokens(_field_tokens(pred), _field_tokens(gold), weight)
