"""Ranking semantics and evaluation measures, computed in-process.

Rankings are derived purely from document scores: documents are sorted by
descending score, and score ties are broken by descending lexicographic
document id, matching the reference command-line evaluator. Measure values
are produced by a single-pass scoring kernel; a compiled extension is used
when available, with a pure-Python twin selected at import otherwise (or
when ``TREVL_PURE_PYTHON`` is set).
"""

from __future__ import annotations

import math
import numbers
import os
from operator import itemgetter
from typing import Iterable, Mapping, NamedTuple

from trevl import _kernel_py
from trevl.errors import EmptyResultsError, EvalInputError

try:
    from trevl import _speedups
except ImportError:  # extension not built; fall back to the Python twin
    _speedups = None

KERNELS = {"pure": _kernel_py.score_ranking}
if _speedups is not None:
    KERNELS["compiled"] = _speedups.score_ranking


def default_kernel() -> str:
    if os.environ.get("TREVL_PURE_PYTHON"):
        return "pure"
    return "compiled" if "compiled" in KERNELS else "pure"


DEFAULT_CUTOFFS = (5, 10, 15, 20, 30, 100, 200, 500, 1000)

_CUTOFF_FAMILIES = ("P", "ndcg_cut")
_PLAIN_MEASURES = ("num_ret", "num_rel", "num_rel_ret", "map", "recip_rank", "ndcg")
# Counting measures are summed, not averaged, in the aggregate row.
_SUMMED_MEASURES = frozenset({"num_ret", "num_rel", "num_rel_ret"})

_SCORE_DOC = itemgetter(1, 0)
_INF = float("inf")


def supported_measures() -> frozenset[str]:
    """The closed set of measure identifiers this engine implements."""
    return frozenset(_PLAIN_MEASURES) | frozenset(_CUTOFF_FAMILIES)


class MeasureSelection:
    """A validated set of measures plus the cutoff list for @k families.

    Identifiers may be family names (``P``, ``ndcg_cut`` — expanded over
    ``cutoffs``, defaulting to DEFAULT_CUTOFFS) or single-cutoff forms such
    as ``P_5``/``ndcg_cut_100``. Unknown identifiers raise ValueError.
    """

    def __init__(self, identifiers: Iterable[str], cutoffs: Iterable[int] | None = None):
        if isinstance(identifiers, str):
            identifiers = (identifiers,)
        base = tuple(DEFAULT_CUTOFFS if cutoffs is None else cutoffs)
        if not base or any((not isinstance(k, int)) or k < 1 for k in base):
            raise ValueError("cutoffs must be positive integers")
        plain: set[str] = set()
        family_cutoffs: dict[str, set[int]] = {}
        for ident in identifiers:
            if ident in _PLAIN_MEASURES:
                plain.add(ident)
            elif ident in _CUTOFF_FAMILIES:
                family_cutoffs.setdefault(ident, set()).update(base)
            else:
                family, _, suffix = ident.rpartition("_")
                if family in _CUTOFF_FAMILIES and suffix.isdigit() and int(suffix) >= 1:
                    family_cutoffs.setdefault(family, set()).add(int(suffix))
                else:
                    raise ValueError(
                        f"unknown measure {ident!r}; supported: "
                        + ", ".join(sorted(supported_measures()))
                    )
        if not plain and not family_cutoffs:
            raise ValueError("at least one measure must be selected")
        self._plain = frozenset(plain)
        self._family_cutoffs = {
            fam: tuple(sorted(ks)) for fam, ks in family_cutoffs.items()
        }

    @property
    def precision_cutoffs(self) -> tuple[int, ...]:
        return self._family_cutoffs.get("P", ())

    @property
    def ndcg_cutoffs(self) -> tuple[int, ...]:
        return self._family_cutoffs.get("ndcg_cut", ())

    def ordered_keys(self) -> tuple[str, ...]:
        """Result-dict keys in canonical output order."""
        keys: list[str] = [m for m in ("num_ret", "num_rel", "num_rel_ret", "map", "recip_rank") if m in self._plain]
        keys.extend(f"P_{k}" for k in self.precision_cutoffs)
        if "ndcg" in self._plain:
            keys.append("ndcg")
        keys.extend(f"ndcg_cut_{k}" for k in self.ndcg_cutoffs)
        return tuple(keys)

    def __contains__(self, measure: str) -> bool:
        return measure in self._plain or measure in self._family_cutoffs

    def __repr__(self) -> str:
        names = sorted(self._plain) + sorted(self._family_cutoffs)
        return f"MeasureSelection({names})"


def _check_relevance(qid, did, rel):
    if isinstance(rel, bool) or not isinstance(rel, numbers.Integral):
        raise EvalInputError(
            f"relevance for query {qid!r}, document {did!r} must be an integer, got {rel!r}"
        )


def _check_score(qid, did, score):
    if not isinstance(score, numbers.Real) or not math.isfinite(score):
        raise EvalInputError(
            f"score for query {qid!r}, document {did!r} must be a finite real, got {score!r}"
        )


class QrelSet:
    """Per-query mapping of document id to integer relevance level.

    Levels <= 0 mean judged-non-relevant. Each (query, document) pair is
    unique by construction (nested-mapping input) or checked (pair input).
    """

    __slots__ = ("queries",)

    def __init__(self, queries: Mapping[str, Mapping[str, int]], _validated: bool = False):
        if not _validated:
            for qid, docs in queries.items():
                for did, rel in docs.items():
                    _check_relevance(qid, did, rel)
        self.queries = {qid: dict(docs) for qid, docs in queries.items()}

    @classmethod
    def from_pairs(cls, records: Iterable[tuple[str, str, int]]) -> "QrelSet":
        queries: dict[str, dict[str, int]] = {}
        for qid, did, rel in records:
            _check_relevance(qid, did, rel)
            docs = queries.setdefault(qid, {})
            if did in docs:
                raise EvalInputError(f"duplicate judgment for query {qid!r}, document {did!r}")
            docs[did] = rel
        return cls(queries, _validated=True)

    def __eq__(self, other) -> bool:
        return isinstance(other, QrelSet) and self.queries == other.queries

    def __len__(self) -> int:
        return len(self.queries)


class RunSet:
    """Per-query mapping of document id to finite retrieval score."""

    __slots__ = ("queries",)

    def __init__(self, queries: Mapping[str, Mapping[str, float]], _validated: bool = False):
        if not _validated:
            for qid, docs in queries.items():
                for did, score in docs.items():
                    _check_score(qid, did, score)
        self.queries = {qid: dict(docs) for qid, docs in queries.items()}

    @classmethod
    def from_pairs(cls, records: Iterable[tuple[str, str, float]]) -> "RunSet":
        queries: dict[str, dict[str, float]] = {}
        for qid, did, score in records:
            _check_score(qid, did, score)
            docs = queries.setdefault(qid, {})
            if did in docs:
                raise EvalInputError(f"duplicate document {did!r} in run for query {qid!r}")
            docs[did] = score
        return cls(queries, _validated=True)

    def __eq__(self, other) -> bool:
        return isinstance(other, RunSet) and self.queries == other.queries

    def __len__(self) -> int:
        return len(self.queries)


class RankedDoc(NamedTuple):
    doc_id: str
    score: float
    rank: int


class OrderedRanking:
    """Documents sorted by (score desc, doc-id desc), ranks 1..n."""

    __slots__ = ("entries",)

    def __init__(self, entries: tuple[RankedDoc, ...]):
        self.entries = entries

    def doc_ids(self) -> list[str]:
        return [e.doc_id for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, OrderedRanking) and self.entries == other.entries


def rank_documents(scored: Mapping[str, float]) -> OrderedRanking:
    """Order a scored document map; rejects non-finite scores."""
    for did, score in scored.items():
        if not math.isfinite(score):
            raise EvalInputError(f"non-finite score {score!r} for document {did!r}")
    items = sorted(scored.items(), key=_SCORE_DOC, reverse=True)
    return OrderedRanking(
        tuple(RankedDoc(did, score, rank) for rank, (did, score) in enumerate(items, 1))
    )


def average_precision(ranking: OrderedRanking, judgments: Mapping[str, int], num_rel: int) -> float:
    """Sum of precision at each retrieved relevant rank, over num_rel."""
    if num_rel <= 0:
        return 0.0
    ap_sum = 0.0
    count = 0
    for entry in ranking:
        if judgments.get(entry.doc_id, 0) > 0:
            count += 1
            ap_sum += count / entry.rank
    return ap_sum / num_rel


def _ideal_dcg(judgments: Mapping[str, int], depth: int | None) -> float:
    gains = sorted((rel for rel in judgments.values() if rel > 0), reverse=True)
    if depth is not None:
        gains = gains[:depth]
    idcg = 0.0
    for i, gain in enumerate(gains):
        idcg += gain / math.log2(i + 2)
    return idcg


def ndcg(ranking: OrderedRanking, judgments: Mapping[str, int], cutoff: int | None = None) -> float:
    """DCG/IDCG with linear gain and 1/log2(rank+1) discount.

    IDCG ranks all judged relevant documents by decreasing level, truncated
    at the same cutoff when one is given; returns 0 when nothing relevant
    is judged.
    """
    idcg = _ideal_dcg(judgments, cutoff)
    if idcg == 0.0:
        return 0.0
    dcg = 0.0
    for entry in ranking:
        if cutoff is not None and entry.rank > cutoff:
            break
        rel = judgments.get(entry.doc_id, 0)
        if rel > 0:
            dcg += rel / math.log2(entry.rank + 1)
    return dcg / idcg


def precision_at_k(ranking: OrderedRanking, judgments: Mapping[str, int], k: int) -> float:
    """Relevant count in the top min(n, k), divided by k (always k)."""
    if k <= 0:
        raise EvalInputError(f"cutoff must be positive, got {k}")
    count = 0
    for entry in ranking:
        if entry.rank > k:
            break
        if judgments.get(entry.doc_id, 0) > 0:
            count += 1
    return count / k


class _QueryInfo(NamedTuple):
    judgments: dict[str, int]
    num_rel: int
    idcg_full: float
    idcg_at: tuple[float, ...]  # aligned with the evaluator's ndcg cutoffs


class ResultSet:
    """Per-query, per-measure values plus the counts needed to aggregate."""

    __slots__ = ("per_query", "evaluated_query_count", "qrel_query_count", "measure_keys")

    def __init__(self, per_query, qrel_query_count, measure_keys):
        self.per_query = per_query
        self.evaluated_query_count = len(per_query)
        self.qrel_query_count = qrel_query_count
        self.measure_keys = measure_keys

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ResultSet)
            and self.per_query == other.per_query
            and self.qrel_query_count == other.qrel_query_count
            and self.measure_keys == other.measure_keys
        )


class Evaluator:
    """Frozen judgments plus a measure selection; evaluate() is reentrant.

    All per-query judgment statistics (relevant counts, ideal DCG prefixes)
    are precomputed at construction, so concurrent evaluate() calls share
    only immutable state.
    """

    def __init__(
        self,
        qrel: QrelSet | Mapping[str, Mapping[str, int]],
        measures: MeasureSelection | Iterable[str] | None = None,
        kernel: str | None = None,
    ):
        if not isinstance(qrel, QrelSet):
            qrel = QrelSet(qrel)
        if measures is None:
            measures = MeasureSelection(supported_measures())
        elif not isinstance(measures, MeasureSelection):
            measures = MeasureSelection(measures)
        self.measures = measures
        kernel_name = kernel or default_kernel()
        if kernel_name not in KERNELS:
            raise ValueError(f"unknown kernel {kernel_name!r}; available: {sorted(KERNELS)}")
        self.kernel_name = kernel_name
        self._score_ranking = KERNELS[kernel_name]

        p_cuts = measures.precision_cutoffs
        n_cuts = measures.ndcg_cutoffs
        union = sorted(set(p_cuts) | set(n_cuts))
        self._cutoffs = union
        self._p_index = [union.index(k) for k in p_cuts]
        self._n_index = [union.index(k) for k in n_cuts]
        self._keys = measures.ordered_keys()

        want_full_idcg = "ndcg" in measures
        self._queries: dict[str, _QueryInfo] = {}
        for qid, docs in qrel.queries.items():
            num_rel = 0
            for rel in docs.values():
                if rel > 0:
                    num_rel += 1
            idcg_full = _ideal_dcg(docs, None) if want_full_idcg else 0.0
            idcg_at = tuple(_ideal_dcg(docs, k) for k in n_cuts)
            self._queries[qid] = _QueryInfo(docs, num_rel, idcg_full, idcg_at)

    @property
    def query_ids(self) -> frozenset[str]:
        return frozenset(self._queries)

    def relevant_count(self, qid: str) -> int:
        return self._queries[qid].num_rel

    def evaluate(self, run: RunSet | Mapping[str, Mapping[str, float]]) -> ResultSet:
        """Compute every selected measure for each query judged in the qrel.

        Run documents absent from the qrel count as non-relevant; judged
        documents that were not retrieved still count toward num_rel and
        the ideal DCG. Queries absent from the qrel are skipped.
        """
        if isinstance(run, RunSet):
            queries = run.queries
            validated = True
        else:
            queries = run
            validated = False
        cutoffs = self._cutoffs
        score_ranking = self._score_ranking
        infos = self._queries
        per_query: dict[str, dict[str, float]] = {}
        for qid, scored in queries.items():
            info = infos.get(qid)
            if info is None:
                continue
            get = info.judgments.get
            try:
                items = sorted(scored.items(), key=_SCORE_DOC, reverse=True)
                if validated:
                    rels = [get(did, 0) for did, _ in items]
                else:
                    rels = []
                    append = rels.append
                    for did, score in items:
                        # NaN fails both comparisons; inf/-inf fail one
                        if not -_INF < score < _INF:
                            raise EvalInputError(
                                f"non-finite score {score!r} for document {did!r} "
                                f"in query {qid!r}"
                            )
                        append(get(did, 0))
            except TypeError as exc:
                raise EvalInputError(f"bad score in query {qid!r}: {exc}") from None
            ap_sum, dcg, first, rel_ret, rel_at, dcg_at = score_ranking(rels, cutoffs)
            per_query[qid] = self._assemble(
                info, len(rels), ap_sum, dcg, first, rel_ret, rel_at, dcg_at
            )
        return ResultSet(per_query, len(self._queries), self._keys)

    def _assemble(self, info, num_ret, ap_sum, dcg, first, rel_ret, rel_at, dcg_at):
        values: dict[str, float] = {}
        for key in self._keys:
            if key == "num_ret":
                values[key] = num_ret
            elif key == "num_rel":
                values[key] = info.num_rel
            elif key == "num_rel_ret":
                values[key] = rel_ret
            elif key == "map":
                values[key] = ap_sum / info.num_rel if info.num_rel > 0 else 0.0
            elif key == "recip_rank":
                values[key] = 1.0 / first if first > 0 else 0.0
            elif key == "ndcg":
                values[key] = dcg / info.idcg_full if info.idcg_full > 0.0 else 0.0
            else:
                values[key] = 0.0  # placeholder, filled below
        for k, idx in zip(self.measures.precision_cutoffs, self._p_index):
            values[f"P_{k}"] = rel_at[idx] / k
        for k, idx, idcg in zip(self.measures.ndcg_cutoffs, self._n_index, info.idcg_at):
            values[f"ndcg_cut_{k}"] = dcg_at[idx] / idcg if idcg > 0.0 else 0.0
        return values


def aggregate(results: ResultSet, mode: str = "judged-only") -> dict[str, float]:
    """Combine per-query values into one row.

    Ranked measures are arithmetic means; counting measures (num_*) are
    sums, matching the reference tool's totals row. ``judged-only``
    averages over evaluated queries, ``complete`` over every judged query
    with missing queries contributing 0.
    """
    if mode not in ("judged-only", "complete"):
        raise ValueError(f"unknown aggregation mode {mode!r}")
    if mode == "judged-only":
        denom = results.evaluated_query_count
        if denom == 0:
            raise EmptyResultsError("no queries were evaluated; nothing to aggregate")
    else:
        denom = results.qrel_query_count
        if denom == 0:
            raise EmptyResultsError("the qrel contains no queries; nothing to aggregate")
    out: dict[str, float] = {}
    for key in results.measure_keys:
        total = 0.0
        for values in results.per_query.values():
            total += values[key]
        out[key] = total if key in _SUMMED_MEASURES else total / denom
    return out
