# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel for the per-cube inner maximization, specialized to d = 1.

Mirrors the numpy kernel: for each query level j, a bottom-up recursion over
the descendant levels plus a running maximum over the ancestor chain. Flat
indices are (row << u) | col at level u, row = source axis, col = target axis.
"""

from libc.math cimport sqrt

import numpy as np


cdef double SQRT2 = sqrt(2.0)
cdef double ALPHA = (1.0 - 1.0 / SQRT2) / 2.0


cdef inline double pair_score(double a, double b, double mass, double count,
                              double inv2n) nogil:
    cdef double sa = sqrt(a)
    cdef double sb = sqrt(b)
    cdef double ab = a + b
    cdef double diff = sb - sa
    cdef double h2 = diff * diff * mass * inv2n
    cdef double term1 = mass * sqrt(ab) * diff * (inv2n / SQRT2)
    cdef double term2 = 0.0
    if ab > 0.0:
        term2 = count * diff / (sqrt(ab) * SQRT2) * (2.0 * inv2n)
    cdef double term3 = mass * (a - b) * inv2n
    return ALPHA * h2 + term1 + term2 + term3


def sup_all(list values, list masses, list counts, long n, double leaf_weight,
            int dim):
    """Drop-in for the numpy kernel; d = 1 (dim == 2) only."""
    if dim != 2:
        raise ValueError("compiled kernel supports d = 1 only")
    cdef int max_level = len(values) - 1
    cdef double inv2n = 1.0 / (2.0 * n)
    cdef long visits = 0
    cdef int j, u, t, shift
    cdef long side_j, side_u, x, y, idx, aidx, cbase
    cdef double lf, cs, cand
    cdef double[::1] vj, vu, wu, cu, vt, wj, cj, acc, nxt, best

    sup = []
    for j in range(max_level + 1):
        side_j = 1 << j
        vj = values[j]
        acc = None
        for u in range(max_level, j - 1, -1):
            side_u = 1 << u
            shift = u - j
            vu = values[u]
            wu = masses[u]
            cu = counts[u]
            nxt = np.empty(side_u * side_u)
            visits += side_u * side_u
            with nogil:
                for x in range(side_u):
                    aidx = (x >> shift) << j
                    for y in range(side_u):
                        idx = (x << u) | y
                        lf = pair_score(vj[aidx | (y >> shift)], vu[idx],
                                        wu[idx], cu[idx], inv2n) - leaf_weight
                        if u == max_level:
                            nxt[idx] = lf
                        else:
                            cbase = ((x << 1) << (u + 1)) | (y << 1)
                            cs = (acc[cbase] + acc[cbase | 1]
                                  + acc[cbase | (1 << (u + 1))]
                                  + acc[cbase | (1 << (u + 1)) | 1])
                            nxt[idx] = lf if lf > cs else cs
            acc = nxt
        best = acc
        wj = masses[j]
        cj = counts[j]
        for t in range(j):
            vt = values[t]
            shift = j - t
            visits += side_j * side_j
            with nogil:
                for x in range(side_j):
                    aidx = (x >> shift) << t
                    for y in range(side_j):
                        idx = (x << j) | y
                        cand = pair_score(vj[idx], vt[aidx | (y >> shift)],
                                          wj[idx], cj[idx], inv2n) - leaf_weight
                        if cand > best[idx]:
                            best[idx] = cand
        sup.append(np.asarray(best))
    return sup, visits
