"""Hybrid retrieval over semi-structured records: metadata filters plus dense search."""

from ._hyst import (
    BM25Index,
    DimensionMismatch,
    Filter,
    HystError,
    ParseError,
    Project,
    Schema,
    SchemaError,
    VectorStore,
    embed_hashed,
    ingest,
    interpolate,
    linearize,
    matches,
    plan_rules,
    precision_at_k,
    recall_at_k,
    reciprocal_rank,
    render_prompt,
    rrf,
    validate,
    validated,
    write_synthetic,
)

__all__ = [
    "BM25Index",
    "DimensionMismatch",
    "Filter",
    "HystError",
    "ParseError",
    "Project",
    "Schema",
    "SchemaError",
    "VectorStore",
    "embed_hashed",
    "ingest",
    "interpolate",
    "linearize",
    "matches",
    "plan_rules",
    "precision_at_k",
    "recall_at_k",
    "reciprocal_rank",
    "render_prompt",
    "rrf",
    "validate",
    "validated",
    "write_synthetic",
]
__version__ = "0.1.0"
