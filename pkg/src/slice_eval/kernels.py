"""Kernel selection: compiled extension when importable, else pure Python.

Set ``SLICE_EVAL_PURE_PYTHON=1`` to force the fallback.
"""
import os

if os.environ.get("SLICE_EVAL_PURE_PYTHON"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

levenshtein = _impl.levenshtein
similarity = _impl.similarity
best_match_means = _impl.best_match_means
COMPILED = _impl.__name__.endswith("._kernels")

__all__ = ["levenshtein", "similarity", "best_match_means", "COMPILED"]
