# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled ranking-scoring kernel; see _kernel_py for the reference twin."""

from libc.math cimport log2
from libc.stdlib cimport free, malloc


def score_ranking(rels, cutoffs):
    """Same contract as trevl._kernel_py.score_ranking."""
    cdef Py_ssize_t n = len(rels)
    cdef Py_ssize_t n_cut = len(cutoffs)
    cdef long long *c_rels = <long long *> malloc((n + 1) * sizeof(long long))
    cdef long long *c_cuts = <long long *> malloc((n_cut + 1) * sizeof(long long))
    cdef long long *c_rel_at = <long long *> malloc((n_cut + 1) * sizeof(long long))
    cdef double *c_dcg_at = <double *> malloc((n_cut + 1) * sizeof(double))
    cdef double ap_sum = 0.0, dcg = 0.0
    cdef long long count = 0, first = 0
    cdef Py_ssize_t i, c

    if c_rels == NULL or c_cuts == NULL or c_rel_at == NULL or c_dcg_at == NULL:
        free(c_rels)
        free(c_cuts)
        free(c_rel_at)
        free(c_dcg_at)
        raise MemoryError()
    try:
        for i in range(n):
            c_rels[i] = rels[i]
        for c in range(n_cut):
            c_cuts[c] = cutoffs[c]

        with nogil:
            c = 0
            for i in range(n):
                if c_rels[i] > 0:
                    count += 1
                    ap_sum += (<double> count) / (<double> (i + 1))
                    dcg += (<double> c_rels[i]) / log2(<double> (i + 2))
                    if first == 0:
                        first = i + 1
                while c < n_cut and c_cuts[c] == i + 1:
                    c_rel_at[c] = count
                    c_dcg_at[c] = dcg
                    c += 1
            while c < n_cut:
                c_rel_at[c] = count
                c_dcg_at[c] = dcg
                c += 1

        rel_at = [c_rel_at[c] for c in range(n_cut)]
        dcg_at = [c_dcg_at[c] for c in range(n_cut)]
        return ap_sum, dcg, int(first), int(count), rel_at, dcg_at
    finally:
        free(c_rels)
        free(c_cuts)
        free(c_rel_at)
        free(c_dcg_at)
