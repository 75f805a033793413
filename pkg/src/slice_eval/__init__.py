"""Schema-lineage scoring toolkit.

The composite score gates on response format and exact source columns, then
mixes source-table, transformation and aggregation similarity.
"""
__version__ = "0.1.0"

from .gate import ModelResponse, format_score, gate_response  # noqa: E402
from .lineage import (  # noqa: E402
    LineageTask,
    SchemaLineage,
    canonical_serialize,
    parse_lineage_dict,
)
from .scoring import EvaluationConfig, load_config, slice_score  # noqa: E402

__all__ = [
    "EvaluationConfig", "LineageTask", "ModelResponse", "SchemaLineage", "canonical_serialize",
    "format_score", "gate_response", "load_config", "parse_lineage_dict", "slice_score",
]
