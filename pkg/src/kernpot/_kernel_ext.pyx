# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementation of the hot kernel-sum primitive.

Streams over atom pairs without materializing the full atom-pair kernel
matrix, so memory stays O(Q*T*S) regardless of atom counts. The GIL is
released for the whole accumulation, which lets callers tile frame ranges
across threads.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp

KIND_LINEAR = 0
KIND_GAUSSIAN = 1


cdef inline double _pair_value(const double[:, ::1] xq, Py_ssize_t i,
                               const double[:, ::1] xt, Py_ssize_t j,
                               int kind, double inv_two_sigma_sq,
                               Py_ssize_t d) noexcept nogil:
    cdef double acc = 0.0
    cdef double diff
    cdef Py_ssize_t k
    if kind == 0:
        for k in range(d):
            acc += xq[i, k] * xt[j, k]
        return acc
    for k in range(d):
        diff = xq[i, k] - xt[j, k]
        acc += diff * diff
    return exp(-acc * inv_two_sigma_sq)


def frame_kernel_sums(const double[:, ::1] xq,
                      const cnp.int64_t[::1] qoff,
                      const cnp.int64_t[::1] qspecies,
                      const double[:, ::1] xt,
                      const cnp.int64_t[::1] toff,
                      const cnp.int64_t[::1] tspecies,
                      int n_species,
                      int kind,
                      double sigma,
                      bint symmetric=False):
    """Raw kernel sums per frame pair; see ``_kernel_py.frame_kernel_sums``."""
    cdef Py_ssize_t nq = qoff.shape[0] - 1
    cdef Py_ssize_t nt = toff.shape[0] - 1
    cdef Py_ssize_t d = xq.shape[1]

    total_arr = np.zeros((nq, nt))
    species_arr = np.zeros((n_species, nq, nt))
    cdef double[:, ::1] total = total_arr
    cdef double[:, :, ::1] per_species = species_arr

    cdef double inv_two_sigma_sq = 0.0
    if kind == 1:
        inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma)

    cdef Py_ssize_t a, b, b0, i, j
    cdef cnp.int64_t si
    cdef double v, tot_acc

    with nogil:
        for a in range(nq):
            b0 = a if symmetric else 0
            for b in range(b0, nt):
                tot_acc = 0.0
                for i in range(qoff[a], qoff[a + 1]):
                    si = qspecies[i]
                    for j in range(toff[b], toff[b + 1]):
                        v = _pair_value(xq, i, xt, j, kind, inv_two_sigma_sq, d)
                        tot_acc += v
                        if tspecies[j] == si:
                            per_species[si - 1, a, b] += v
                total[a, b] = tot_acc

    if symmetric:
        idx_u = np.triu_indices(nq, k=1)
        total_arr[(idx_u[1], idx_u[0])] = total_arr[idx_u]
        for s in range(n_species):
            species_arr[s][(idx_u[1], idx_u[0])] = species_arr[s][idx_u]
    return total_arr, species_arr
