"""Per-language AST similarity with error-tolerant tree-sitter parsers.

Parsers are not thread-safe. Each thread gets its own parser set through
a thread-local pool, so the public functions may be called from any number
of threads; processes each build their own pool on first use. Results are
plain floats and counters and can be passed between workers freely.
"""
from __future__ import annotations

import threading
from collections import Counter
from functools import lru_cache

import tree_sitter
import tree_sitter_c_sharp
import tree_sitter_python
import tree_sitter_sql

from ..lineage import CODEEND


class UnsupportedLanguage(ValueError):
    pass


_GRAMMARS = {
    "sql": tree_sitter_sql.language,
    "python": tree_sitter_python.language,
    "csharp": tree_sitter_c_sharp.language,
}

# Alternative wrappings tried for bare fragments; the parse with the fewest
# error nodes wins, ties go to the earliest entry.
_WRAPPERS = {
    "sql": (("", ""), ("SELECT ", "")),
    "python": (("", ""),),
    "csharp": (("", ""), ("", ";")),
}

SUPPORTED_LANGUAGES = tuple(_GRAMMARS)

_local = threading.local()


def _parser(language: str) -> tree_sitter.Parser:
    pool = getattr(_local, "parsers", None)
    if pool is None:
        pool = _local.parsers = {}
    parser = pool.get(language)
    if parser is None:
        parser = pool[language] = tree_sitter.Parser(tree_sitter.Language(_GRAMMARS[language]()))
    return parser


def _subtrees(root) -> tuple[Counter, int]:
    """Serialize every internal node by kind structure (named nodes only).

    Returns the multiset of serialized subtrees and the error-node count.
    """
    bag: Counter = Counter()
    errors = 0
    # iterative post-order: stack of (node, visited)
    stack = [(root, False)]
    sexp = {}
    while stack:
        node, visited = stack.pop()
        if node.is_error or node.is_missing:
            if not visited:
                errors += 1
        if not visited:
            stack.append((node, True))
            for child in node.named_children:
                stack.append((child, False))
            continue
        kids = node.named_children
        if kids:
            s = "(" + node.type + " " + " ".join(sexp.pop(k.id) for k in kids) + ")"
        else:
            s = "(" + node.type + ")"
        sexp[node.id] = s
        if node.child_count:
            bag[s] += 1
    return bag, errors


@lru_cache(maxsize=65536)
def _snippet_subtrees(snippet: str, language: str) -> tuple[Counter, int]:
    parser = _parser(language)
    best = None
    for prefix, suffix in _WRAPPERS[language]:
        tree = parser.parse((prefix + snippet + suffix).encode("utf-8"))
        bag, errors = _subtrees(tree.root_node)
        if best is None or errors < best[1]:
            best = (bag, errors)
        if errors == 0:
            break
    return best


def subtree_bag(text: str, language: str) -> Counter:
    """Multiset of subtrees over every ``<CODEEND>``-separated snippet in ``text``."""
    if language not in _GRAMMARS:
        raise UnsupportedLanguage(f"no parser for {language!r}; have {SUPPORTED_LANGUAGES}")
    bag: Counter = Counter()
    for snippet in text.split(CODEEND):
        snippet = snippet.strip()
        if snippet:
            bag.update(_snippet_subtrees(snippet, language)[0])
    return bag


def _normalized(text: str) -> list[str]:
    return " ".join(text.split(CODEEND)).split()


def ast_similarity(pred: str, gold: str, language: str) -> float:
    """F1 between the subtree multisets of ``pred`` and ``gold``.

    Falls back to whitespace-normalized string equality when either side
    has no internal nodes.
    """
    a, b = subtree_bag(pred, language), subtree_bag(gold, language)
    na, nb = sum(a.values()), sum(b.values())
    if na == 0 or nb == 0:
        return 1.0 if _normalized(pred) == _normalized(gold) else 0.0
    overlap = sum((a & b).values())
    return 2.0 * overlap / (na + nb)
