"""Pure numpy version of the Metropolis sweep kernel.

Reads are vectorised; sites are visited in the same fixed order as the
compiled kernel and every floating-point operation is performed in the same
order, so both backends agree bit for bit.
"""

from __future__ import annotations

import numpy as np

from .rng import draw_array, unit_array

_TOP_BIT = np.uint64(63)


def anneal_reads(spins, keys, nbr_ptr, nbr_idx, nbr_w, bias, beta, inv_nr, wplus, glauber=0):
    n_reads, n, nr = spins.shape
    keys = np.asarray(keys, dtype=np.uint64)
    ctr = 0
    for j in range(n):
        for l in range(nr):
            ctr += 1
            bits = draw_array(keys, ctr - 1) >> _TOP_BIT
            spins[:, j, l] = np.where(bits == 1, 1, -1)
    work = spins.astype(np.float64)
    neighbours = [(nbr_idx[nbr_ptr[j]:nbr_ptr[j + 1]], nbr_w[nbr_ptr[j]:nbr_ptr[j + 1]]) for j in range(n)]
    for t in range(len(wplus)):
        wp = float(wplus[t])
        for l in range(nr):
            lm = l - 1 if l > 0 else nr - 1
            lp = l + 1 if l < nr - 1 else 0
            for j in range(n):
                ctr += 1
                s = work[:, j, l]
                field = np.zeros(n_reads)
                idx, w = neighbours[j]
                for k, wk in zip(idx, w):
                    field = field + wk * work[:, k, l]
                field = field + bias[j]
                if nr > 1:
                    ring = work[:, j, lm] + work[:, j, lp]
                    local = inv_nr * field + wp * ring
                else:
                    local = inv_nr * field
                de = 2.0 * s * local
                if glauber:
                    u = unit_array(draw_array(keys, ctr - 1))
                    with np.errstate(over="ignore"):
                        accept = u < 1.0 / (1.0 + np.exp(beta * de))
                    work[:, j, l] = np.where(accept, -s, s)
                    continue
                flip = de <= 0.0
                pending = ~flip
                if pending.any():
                    u = unit_array(draw_array(keys[pending], ctr - 1))
                    flip[pending] = u < np.exp(-beta * de[pending])
                work[:, j, l] = np.where(flip, -s, s)
    spins[...] = work.astype(np.int8)
