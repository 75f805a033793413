# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernels; same contract as ``_kernels_py``."""
from libc.stdlib cimport malloc, free


cdef Py_ssize_t _lev(str a, str b) except -1:
    cdef Py_ssize_t n = len(a), m = len(b), i, j, best, sub
    cdef Py_ssize_t *prev
    cdef Py_ssize_t *cur
    cdef Py_ssize_t *tmp
    cdef Py_UCS4 ca
    if n < m:
        a, b = b, a
        n, m = m, n
    if m == 0:
        return n
    prev = <Py_ssize_t *> malloc((m + 1) * sizeof(Py_ssize_t))
    cur = <Py_ssize_t *> malloc((m + 1) * sizeof(Py_ssize_t))
    if prev == NULL or cur == NULL:
        free(prev)
        free(cur)
        raise MemoryError()
    for j in range(m + 1):
        prev[j] = j
    for i in range(1, n + 1):
        ca = a[i - 1]
        cur[0] = i
        for j in range(1, m + 1):
            sub = prev[j - 1] + (0 if ca == b[j - 1] else 1)
            best = prev[j] + 1
            if cur[j - 1] + 1 < best:
                best = cur[j - 1] + 1
            if sub < best:
                best = sub
            cur[j] = best
        tmp = prev
        prev = cur
        cur = tmp
    best = prev[m]
    free(prev)
    free(cur)
    return best


def levenshtein(str a, str b):
    if a == b:
        return 0
    return _lev(a, b)


cpdef double similarity(str a, str b):
    cdef Py_ssize_t n = max(len(a), len(b))
    if n == 0:
        return 1.0
    if a == b:
        return 1.0
    return 1.0 - <double> _lev(a, b) / n


def best_match_means(list pred, list gold):
    cdef Py_ssize_t np_ = len(pred), ng = len(gold), i, j
    cdef double s, row = 0.0, col = 0.0
    cdef list col_best = [0.0] * ng
    cdef double rbest
    for i in range(np_):
        rbest = 0.0
        for j in range(ng):
            s = similarity(pred[i], gold[j])
            if s > rbest:
                rbest = s
            if s > <double> col_best[j]:
                col_best[j] = s
        row += rbest
    for j in range(ng):
        col += <double> col_best[j]
    return row / np_, col / ng
