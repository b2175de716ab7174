# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled path-integral Metropolis sweeps.

Must stay operation-for-operation identical to ``_fallback.anneal_reads`` so
both backends return bit-identical spin stacks.
"""

from libc.math cimport exp
from libc.stdint cimport uint64_t, int8_t, int64_t

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def anneal_reads(
    int8_t[:, :, ::1] spins,
    const uint64_t[::1] keys,
    const int64_t[::1] nbr_ptr,
    const int64_t[::1] nbr_idx,
    const double[::1] nbr_w,
    const double[::1] bias,
    double beta,
    double inv_nr,
    const double[::1] wplus,
    int glauber=0,
):
    """Anneal ``spins[r]`` (shape ``(n_hidden, n_replicas)``) for every read ``r``.

    ``glauber`` switches the acceptance from min(1, e^-x) to 1 / (1 + e^x).
    """
    cdef Py_ssize_t n_reads = spins.shape[0]
    cdef Py_ssize_t n = spins.shape[1]
    cdef Py_ssize_t nr = spins.shape[2]
    cdef Py_ssize_t n_sweeps = wplus.shape[0]
    cdef Py_ssize_t r, t, l, j, p, lm, lp, site
    cdef uint64_t key, ctr
    cdef double field, local, de, wp, u, x
    cdef int8_t s
    cdef int ring
    cdef int8_t* sp
    cdef const int64_t* ptr = &nbr_ptr[0]
    cdef const int64_t* idx = &nbr_idx[0] if nbr_idx.shape[0] > 0 else NULL
    cdef const double* w = &nbr_w[0] if nbr_w.shape[0] > 0 else NULL
    cdef const double* b = &bias[0]

    with nogil:
        for r in range(n_reads):
            sp = &spins[r, 0, 0]
            key = keys[r]
            ctr = 0
            for j in range(n):
                for l in range(nr):
                    ctr = ctr + 1
                    if mix64(key + ctr * GOLDEN) >> 63:
                        sp[j * nr + l] = 1
                    else:
                        sp[j * nr + l] = -1
            for t in range(n_sweeps):
                wp = wplus[t]
                for l in range(nr):
                    lm = l - 1 if l > 0 else nr - 1
                    lp = l + 1 if l < nr - 1 else 0
                    for j in range(n):
                        ctr = ctr + 1
                        site = j * nr + l
                        s = sp[site]
                        field = 0.0
                        for p in range(ptr[j], ptr[j + 1]):
                            field = field + w[p] * sp[idx[p] * nr + l]
                        field = field + b[j]
                        if nr > 1:
                            ring = sp[j * nr + lm] + sp[j * nr + lp]
                            local = inv_nr * field + wp * ring
                        else:
                            local = inv_nr * field
                        de = 2.0 * s * local
                        if glauber:
                            u = (mix64(key + ctr * GOLDEN) >> 11) * INV_2_53
                            if u < 1.0 / (1.0 + exp(beta * de)):
                                sp[site] = -s
                        elif de <= 0.0:
                            sp[site] = -s
                        else:
                            x = beta * de
                            u = (mix64(key + ctr * GOLDEN) >> 11) * INV_2_53
                            # u is 0 or >= 2**-53 > exp(-37.5), so the shortcut never changes the outcome
                            if (x < 37.5 and u < exp(-x)) or (u == 0.0 and exp(-x) > 0.0):
                                sp[site] = -s
