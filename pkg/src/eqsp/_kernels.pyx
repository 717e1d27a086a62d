# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled log-posterior update for trigonometric likelihoods on a 2^m grid."""

from libc.math cimport log

cdef double LOG_FLOOR = -745.0
cdef double TINY = 1e-290
cdef int BATCH = 8


def apply_batch(double[::1] logw, long long[::1] freq, double[::1] a, double[::1] b,
                double[::1] ctab, double[::1] stab):
    """logw[j] += sum_i log(0.5 * (1 + a_i C[f_i j] + b_i S[f_i j])), then max -> 0.

    Indices into the cos/sin tables are taken modulo the grid size, which must
    be a power of two.  Up to eight factors are multiplied before one log.
    """
    cdef Py_ssize_t G = logw.shape[0]
    cdef Py_ssize_t n = freq.shape[0]
    cdef long long mask = G - 1
    cdef Py_ssize_t j, i, i0, i1, k
    cdef long long t
    cdef double p, term, acc, best
    if ctab.shape[0] != G or stab.shape[0] != G:
        raise ValueError("table size mismatch")
    if G & (G - 1):
        raise ValueError("grid size must be a power of two")
    if a.shape[0] != n or b.shape[0] != n:
        raise ValueError("parameter length mismatch")
    with nogil:
        best = -1e308
        for j in range(G):
            acc = logw[j]
            i0 = 0
            while i0 < n:
                i1 = i0 + BATCH
                if i1 > n:
                    i1 = n
                p = 1.0
                for i in range(i0, i1):
                    t = (freq[i] * j) & mask
                    p = p * (0.5 * (1.0 + a[i] * ctab[t] + b[i] * stab[t]))
                if p > TINY:
                    acc = acc + log(p)
                else:
                    for i in range(i0, i1):
                        t = (freq[i] * j) & mask
                        term = 0.5 * (1.0 + a[i] * ctab[t] + b[i] * stab[t])
                        if term > 0.0:
                            acc = acc + log(term)
                        else:
                            acc = acc + LOG_FLOOR
                i0 = i1
            if acc < LOG_FLOOR:
                acc = LOG_FLOOR
            logw[j] = acc
            if acc > best:
                best = acc
        for j in range(G):
            acc = logw[j] - best
            if acc < LOG_FLOOR:
                acc = LOG_FLOOR
            logw[j] = acc
    return best
