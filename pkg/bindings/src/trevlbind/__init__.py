"""Nested-mapping binding over the compiled ranking-evaluation engine.

The surface is deliberately tiny: ``RelevanceEvaluator(qrel, measures)``
freezes the judgments into engine structures once at construction, and
``evaluate(run)`` returns plain ``{query: {measure: value}}`` mappings.
``supported_measures`` lists every accepted measure identifier; pass it as
the measure set to compute everything at once. Evaluation may be called
concurrently from several threads: the engine shares only immutable state
per evaluator and its compiled scoring loop runs outside the interpreter
lock.
"""

import numbers

from trevl.core import Evaluator as _Evaluator
from trevl.core import supported_measures as _supported

__version__ = "0.1.0"

supported_measures = frozenset(_supported())


class RelevanceEvaluator:
    """Evaluate score mappings against judgments frozen at construction."""

    def __init__(self, qrel, measures):
        for qid, docs in qrel.items():
            for did, rel in docs.items():
                if isinstance(rel, bool) or not isinstance(rel, numbers.Integral):
                    raise TypeError(
                        f"relevance for query {qid!r}, document {did!r} "
                        f"must be an integer, got {rel!r}"
                    )
        # unknown measure identifiers raise ValueError here
        self._evaluator = _Evaluator(qrel, measures)

    def evaluate(self, run):
        """Per-query measure values for every query judged in the qrel."""
        # per_query is built fresh on every call, so handing it out is safe
        return self._evaluator.evaluate(run).per_query


__all__ = ["RelevanceEvaluator", "supported_measures", "__version__"]
