"""Synthetic test collections and a Dirichlet-smoothed retriever.

Documents are symbolic token streams drawn from per-document unigram and
bigram language models. Collection-wide pseudo counts are sampled from an
exponential distribution and act as Dirichlet concentrations; per-document
models are never materialized — tokens are drawn through the equivalent
Polya-urn scheme (base draw with probability A/(A+m), otherwise repeat one
of the document's m earlier draws), which integrates the Dirichlet out
exactly while staying O(tokens).

Queries pick r relevant documents uniformly at random and sample their
terms from P(w|R_q) * (1 - P(w|D)), favoring terms specific to the
relevant set and uncommon in the collection at large.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, fields
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from trevl.core import OrderedRanking, QrelSet, RankedDoc
from trevl.errors import ConfigError

# When a term has never been emitted into the collection its smoothed
# probability would be 0; it contributes this floor instead of -inf.
SMOOTHING_FLOOR = 1e-10

_DENSE_TF_LIMIT = 50_000_000  # cells; beyond this retrieval walks tf maps


@dataclass(frozen=True)
class SynthConfig:
    """Knobs for collection/query synthesis; defaults are desk-scale."""

    vocab_size: int = 1000
    collection_size: int = 100
    mean_doc_length: float = 200.0
    mean_query_length: float = 3.0
    relevant_per_query: int = 5
    query_count: int = 2000
    exponential_rate: float = 1.0
    p_unigram: float = 0.9
    p_bigram: float = 0.1
    seed: int = 0
    bigram_budget_mib: int = 512

    def __post_init__(self):
        if min(self.vocab_size, self.collection_size, self.relevant_per_query, self.query_count) < 1:
            raise ConfigError("sizes must be >= 1")
        if self.mean_doc_length <= 0 or self.mean_query_length <= 0:
            raise ConfigError("mean lengths must be positive")
        if self.exponential_rate <= 0:
            raise ConfigError("exponential rate must be positive")
        if self.p_unigram < 0 or self.p_bigram < 0 or abs(self.p_unigram + self.p_bigram - 1.0) > 1e-9:
            raise ConfigError("n-gram size probabilities must be non-negative and sum to 1")
        if self.relevant_per_query > self.collection_size:
            raise ConfigError("relevant_per_query cannot exceed collection_size")


def parse_config(stream: Iterable[str]) -> SynthConfig:
    """Read ``key = value`` lines into a SynthConfig; unknown keys raise."""
    types = {f.name: f.type for f in fields(SynthConfig)}
    values = {}
    for lineno, line in enumerate(stream, 1):
        text = line.strip()
        if not text:
            continue
        key, eq, raw = (tok.strip() for tok in text.partition("="))
        if not eq or not key or not raw:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {text!r}")
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = int(raw) if types[key] == "int" else float(raw)
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value {raw!r} for {key!r}") from None
    return SynthConfig(**values)


def write_config(config: SynthConfig, stream: IO[str]) -> None:
    for f in fields(SynthConfig):
        stream.write(f"{f.name} = {getattr(config, f.name)}\n")


@dataclass
class SyntheticCollection:
    documents: list[np.ndarray]  # int32 token ids per document
    vocab_size: int
    token_counts: np.ndarray  # collection-wide unigram counts, len vocab_size
    doc_lengths: np.ndarray
    doc_ids: tuple[str, ...]
    bigram_draw_count: int


@dataclass
class QueryCollection:
    queries: list[np.ndarray]
    query_ids: tuple[str, ...]
    relevant_sets: list[np.ndarray]  # document indices, len r each
    qrels: QrelSet


def doc_id_for(index: int, collection_size: int) -> str:
    # zero-padded so lexicographic order equals numeric order
    return f"d{index:0{len(str(collection_size - 1))}d}"


def sample_concentrations(rng: np.random.Generator, rate: float, size: int) -> np.ndarray:
    """Exponential pseudo counts used as Dirichlet concentrations.

    Strictly positive: a draw of exactly 0.0 (probability ~2**-53 per
    sample) is bumped to the smallest positive float so urn totals stay
    valid.
    """
    draws = rng.exponential(1.0 / rate, size=size)
    return np.maximum(draws, np.finfo(np.float64).tiny)


class _PolyaUrn:
    """Sequential sampler for a Dirichlet-compound categorical."""

    __slots__ = ("cumulative", "total", "draws")

    def __init__(self, concentrations_cumsum: np.ndarray):
        self.cumulative = concentrations_cumsum
        self.total = float(concentrations_cumsum[-1])
        self.draws: list[int] = []

    def draw(self, rng: np.random.Generator) -> int:
        u = rng.random() * (self.total + len(self.draws))
        if u < self.total:
            idx = int(np.searchsorted(self.cumulative, u, side="right"))
            idx = min(idx, len(self.cumulative) - 1)
        else:
            idx = self.draws[int(u - self.total)]
        self.draws.append(idx)
        return idx


def _positive_poisson(rng: np.random.Generator, mean: float) -> int:
    # clamped at 1: keeps the mean at mu + exp(-mu) instead of the
    # zero-truncated mu/(1-exp(-mu)), which would drift visibly for small mu
    return max(1, int(rng.poisson(mean)))


def sample_collection(config: SynthConfig) -> SyntheticCollection:
    """Draw the document collection; deterministic given config.seed."""
    rng = np.random.default_rng(config.seed)
    v = config.vocab_size

    uni_conc = sample_concentrations(rng, config.exponential_rate, v)
    uni_cum = np.cumsum(uni_conc)

    bi_cum = None
    if config.p_bigram > 0.0:
        table_bytes = 4 * v * v
        budget = config.bigram_budget_mib * (1 << 20)
        if table_bytes > budget:
            raise ConfigError(
                f"bigram concentration table needs {table_bytes} bytes for vocab {v}, "
                f"over the {config.bigram_budget_mib} MiB budget; lower vocab_size or "
                "raise bigram_budget_mib"
            )
        bi_conc = sample_concentrations(rng, config.exponential_rate, v * v).astype(np.float32)
        bi_cum = np.cumsum(bi_conc, dtype=np.float64)
        del bi_conc

    documents = []
    lengths = []
    counts = np.zeros(v, dtype=np.int64)
    bigram_draws = 0
    for _ in range(config.collection_size):
        target = _positive_poisson(rng, config.mean_doc_length)
        uni_urn = _PolyaUrn(uni_cum)
        bi_urn = _PolyaUrn(bi_cum) if bi_cum is not None else None
        tokens: list[int] = []
        while len(tokens) < target:
            if bi_urn is None or rng.random() < config.p_unigram:
                tokens.append(uni_urn.draw(rng))
            else:
                pair = bi_urn.draw(rng)
                bigram_draws += 1
                first, second = divmod(pair, v)
                tokens.append(first)
                if len(tokens) < target:  # truncate at the target length
                    tokens.append(second)
        doc = np.asarray(tokens, dtype=np.int32)
        documents.append(doc)
        lengths.append(target)
        counts += np.bincount(doc, minlength=v)

    doc_ids = tuple(doc_id_for(i, config.collection_size) for i in range(config.collection_size))
    return SyntheticCollection(
        documents=documents,
        vocab_size=v,
        token_counts=counts,
        doc_lengths=np.asarray(lengths, dtype=np.int64),
        doc_ids=doc_ids,
        bigram_draw_count=bigram_draws,
    )


def sample_queries(
    collection: SyntheticCollection,
    config: SynthConfig,
    max_retries: int = 10,
) -> QueryCollection:
    """Draw queries, relevant sets and the derived binary qrels."""
    if not collection.documents:
        raise ConfigError("cannot sample queries from an empty collection")
    rng = np.random.default_rng(config.seed + 1)
    v = collection.vocab_size
    n_docs = len(collection.documents)
    p_collection = collection.token_counts / collection.token_counts.sum()
    specificity = 1.0 - p_collection

    width = len(str(config.query_count - 1))
    queries = []
    query_ids = []
    relevant_sets = []
    qrels: dict[str, dict[str, int]] = {}
    for qi in range(config.query_count):
        weights = None
        relevant = None
        for _ in range(max_retries):
            relevant = rng.choice(n_docs, size=config.relevant_per_query, replace=False)
            rel_counts = np.zeros(v, dtype=np.int64)
            for d in relevant:
                rel_counts += np.bincount(collection.documents[d], minlength=v)
            p_relevant = rel_counts / rel_counts.sum()
            candidate = p_relevant * specificity
            total = candidate.sum()
            if total > 0.0:
                weights = candidate / total
                break
        if weights is None:
            raise ConfigError(
                "query term weights vanished for every retry; the collection is degenerate"
            )
        length = _positive_poisson(rng, config.mean_query_length)
        terms = rng.choice(v, size=length, replace=True, p=weights).astype(np.int32)
        qid = f"q{qi:0{width}d}"
        queries.append(terms)
        query_ids.append(qid)
        relevant_sets.append(np.sort(relevant))
        qrels[qid] = {doc_id_for(int(d), n_docs): 1 for d in relevant}

    return QueryCollection(
        queries=queries,
        query_ids=tuple(query_ids),
        relevant_sets=relevant_sets,
        qrels=QrelSet(qrels, _validated=True),
    )


@dataclass
class Index:
    """Term statistics backing the query-likelihood retriever."""

    term_frequencies: list[dict[int, int]]
    doc_lengths: np.ndarray
    collection_probs: np.ndarray  # P(w|D), sums to 1
    total_tokens: int
    doc_ids: tuple[str, ...]
    tf_dense: np.ndarray | None  # docs x vocab, when small enough


def build_index(collection: SyntheticCollection) -> Index:
    if not collection.documents:
        raise ConfigError("cannot index an empty collection")
    total = int(collection.token_counts.sum())
    tf_maps = [dict(Counter(doc.tolist())) for doc in collection.documents]
    dense = None
    if len(collection.documents) * collection.vocab_size <= _DENSE_TF_LIMIT:
        dense = np.zeros((len(collection.documents), collection.vocab_size), dtype=np.int32)
        for i, doc in enumerate(collection.documents):
            dense[i] = np.bincount(doc, minlength=collection.vocab_size)
    return Index(
        term_frequencies=tf_maps,
        doc_lengths=np.asarray([len(doc) for doc in collection.documents], dtype=np.int64),
        collection_probs=collection.token_counts / total,
        total_tokens=total,
        doc_ids=collection.doc_ids,
        tf_dense=dense,
    )


def score_documents(index: Index, query_terms: Sequence[int], mu: float = 2500.0) -> np.ndarray:
    """Dirichlet query-likelihood log scores, one per document.

    Each query-term occurrence adds log((tf + mu*P(w|D)) / (|d| + mu));
    terms never seen in the collection fall back to the smoothing floor.
    """
    if mu <= 0:
        raise ConfigError("mu must be positive")
    denom = index.doc_lengths + mu
    scores = np.zeros(len(index.doc_lengths), dtype=np.float64)
    for term, occurrences in Counter(int(t) for t in query_terms).items():
        if not 0 <= term < len(index.collection_probs):
            raise ConfigError(f"term id {term} outside the vocabulary")
        p_w = index.collection_probs[term]
        if index.tf_dense is not None:
            tf = index.tf_dense[:, term]
        else:
            tf = np.asarray([tfs.get(term, 0) for tfs in index.term_frequencies], dtype=np.int64)
        if p_w > 0.0:
            term_scores = np.log((tf + mu * p_w) / denom)
        else:
            # P(w|D) = 0 means the term was never emitted, so tf is 0 in
            # every document; the floor keeps the log finite
            term_scores = np.log(SMOOTHING_FLOOR / denom)
        scores += occurrences * term_scores
    return scores


def retrieve(index: Index, query_terms: Sequence[int], mu: float = 2500.0, top_k: int = 10) -> OrderedRanking:
    """Top-k documents by smoothed query likelihood.

    Ties are broken by descending document id, the same rule the evaluator
    applies; ids are zero-padded so that equals descending index.
    """
    if top_k < 1:
        raise ConfigError("top_k must be >= 1")
    scores = score_documents(index, query_terms, mu)
    n = len(scores)
    order = np.lexsort((-np.arange(n), -scores))[: min(top_k, n)]
    entries = tuple(
        RankedDoc(index.doc_ids[i], float(scores[i]), rank)
        for rank, i in enumerate(order.tolist(), 1)
    )
    return OrderedRanking(entries)


def save_collection(collection: SyntheticCollection, path: str | Path) -> None:
    """One document per line, space-separated token ids."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in collection.documents:
            fh.write(" ".join(str(t) for t in doc.tolist()) + "\n")


def load_collection(path: str | Path, vocab_size: int) -> SyntheticCollection:
    documents = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                documents.append(np.asarray([int(t) for t in line.split()], dtype=np.int32))
    counts = np.zeros(vocab_size, dtype=np.int64)
    for doc in documents:
        counts += np.bincount(doc, minlength=vocab_size)
    return SyntheticCollection(
        documents=documents,
        vocab_size=vocab_size,
        token_counts=counts,
        doc_lengths=np.asarray([len(d) for d in documents], dtype=np.int64),
        doc_ids=tuple(doc_id_for(i, len(documents)) for i in range(len(documents))),
        bigram_draw_count=0,
    )


def save_queries(queries: QueryCollection, path: str | Path) -> None:
    """One query per line: query id then its token ids."""
    with open(path, "w", encoding="utf-8") as fh:
        for qid, terms in zip(queries.query_ids, queries.queries):
            fh.write(qid + " " + " ".join(str(t) for t in terms.tolist()) + "\n")
