import numpy as np
import pytest

GOLDEN_QREL = {"q1": {"d1": 1, "d2": 0}, "q2": {"d2": 1}}
GOLDEN_RUN = {"q1": {"d1": 0.5, "d2": 2.0}, "q2": {"d1": 0.5, "d2": 0.6}}
GOLDEN_NDCG_Q1 = 0.6309297535714575


@pytest.fixture
def golden_qrel():
    return {qid: dict(docs) for qid, docs in GOLDEN_QREL.items()}


@pytest.fixture
def golden_run():
    return {qid: dict(docs) for qid, docs in GOLDEN_RUN.items()}


def random_instance(rng: np.random.Generator, max_queries=4, max_docs=8, max_level=3):
    """A small random (qrel, run) pair with ties and partial judgments."""
    n_queries = int(rng.integers(1, max_queries + 1))
    qrel, run = {}, {}
    for qi in range(n_queries):
        qid = f"q{qi}"
        n_docs = int(rng.integers(1, max_docs + 1))
        pool = [f"d{di}" for di in range(max_docs + 2)]
        rng.shuffle(pool)
        judged = {}
        for doc in pool[: int(rng.integers(0, max_docs + 1))]:
            judged[doc] = int(rng.integers(-1, max_level + 1))
        scored = {}
        for doc in pool[:n_docs]:
            # coarse grid of scores so ties actually happen
            scored[doc] = float(rng.integers(0, 4)) / 2.0
        if judged:
            qrel[qid] = judged
        if scored:
            run[qid] = scored
    return qrel, run
