"""trevl: in-process IR ranking evaluation with trec_eval-compatible semantics."""

from trevl.core import (
    DEFAULT_CUTOFFS,
    Evaluator,
    MeasureSelection,
    OrderedRanking,
    QrelSet,
    RankedDoc,
    ResultSet,
    RunSet,
    aggregate,
    average_precision,
    default_kernel,
    ndcg,
    precision_at_k,
    rank_documents,
    supported_measures,
)
from trevl.errors import (
    BenchmarkError,
    ConfigError,
    DuplicateEntryError,
    EmptyResultsError,
    EvalInputError,
    ParseError,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CUTOFFS",
    "Evaluator",
    "MeasureSelection",
    "OrderedRanking",
    "QrelSet",
    "RankedDoc",
    "ResultSet",
    "RunSet",
    "aggregate",
    "average_precision",
    "default_kernel",
    "ndcg",
    "precision_at_k",
    "rank_documents",
    "supported_measures",
    "BenchmarkError",
    "ConfigError",
    "DuplicateEntryError",
    "EmptyResultsError",
    "EvalInputError",
    "ParseError",
    "__version__",
]
