"""Pure-Python twin of the compiled ranking-scoring kernel.

Kept operation-for-operation identical to ``_speedups.score_ranking`` so the
two produce bit-identical floats; the compiled module is preferred at import
time when available.
"""

from math import log2


def score_ranking(rels, cutoffs):
    """Single pass over a ranked relevance list.

    ``rels`` holds the judged relevance level of each ranked document, best
    rank first; ``cutoffs`` must be sorted ascending and duplicate-free.
    Returns ``(ap_sum, dcg, first_rel_rank, num_rel_ret, rel_at, dcg_at)``
    where ``rel_at``/``dcg_at`` record the relevant-count and DCG prefix at
    each cutoff (ranking shorter than a cutoff yields the full-list value).
    """
    n_cut = len(cutoffs)
    rel_at = [0] * n_cut
    dcg_at = [0.0] * n_cut
    ap_sum = 0.0
    dcg = 0.0
    count = 0
    first = 0
    c = 0
    rank = 0
    for rel in rels:
        rank += 1
        if rel > 0:
            count += 1
            ap_sum += count / rank
            dcg += rel / log2(rank + 1)
            if first == 0:
                first = rank
        while c < n_cut and cutoffs[c] == rank:
            rel_at[c] = count
            dcg_at[c] = dcg
            c += 1
    while c < n_cut:
        rel_at[c] = count
        dcg_at[c] = dcg
        c += 1
    return ap_sum, dcg, first, count, rel_at, dcg_at
