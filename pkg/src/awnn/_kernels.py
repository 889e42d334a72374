"""Compiled per-cell weight solver used by the row imputer.

For target row ``i`` the candidate rows are visited in ascending distance
order (``order[i]``, ties by row index), skipping rows not observed in the
column. The scores ``(d0 - d) / (2 * reg)`` differ from the centered scores
of :func:`awnn.simplex.solve_weights` by a constant, which leaves the
water-filling weights unchanged; anchoring at the nearest admissible
distance ``d0`` keeps the running sum well conditioned when ``reg`` is tiny.

Since every weight is ``b - u`` for the final level ``u``, the estimate is
accumulated in the same pass as ``sum(b * x) - u * sum(x)``.
"""

import numpy as np
from numba import njit, prange


@njit(parallel=True, cache=True)
def impute_cells(dist, order, maskT, XT, reg, degenerate,
                 theta, k_out, wmax_out, dmin_out, dmax_out, dmean_out):
    m, n = XT.shape
    for i in prange(n):
        di = dist[i]
        oi = order[i]
        for j in range(m):
            mj = maskT[j]
            xj = XT[j]
            k = 0
            s = 0.0
            u = 0.0
            d0 = 0.0
            dlast = 0.0
            sbx = 0.0
            sx = 0.0
            sd = 0.0
            for t in range(n):
                r = oi[t]
                dr = di[r]
                if dr == np.inf:
                    break
                if not mj[r]:
                    continue
                if k == 0:
                    d0 = dr
                if degenerate:
                    if dr != d0:
                        break
                    b = 0.0
                else:
                    b = (d0 - dr) / (2.0 * reg)
                    if k > 0 and b <= u:
                        break
                s += b
                k += 1
                u = (s - 1.0) / k
                sbx += b * xj[r]
                sx += xj[r]
                sd += dr
                dlast = dr

            k_out[i, j] = k
            if k == 0:
                theta[i, j] = np.nan
                wmax_out[i, j] = np.nan
                dmin_out[i, j] = np.nan
                dmax_out[i, j] = np.nan
                dmean_out[i, j] = np.nan
            elif degenerate:
                theta[i, j] = sx / k
                wmax_out[i, j] = 1.0 / k
                dmin_out[i, j] = d0
                dmax_out[i, j] = d0
                dmean_out[i, j] = d0
            else:
                theta[i, j] = sbx - u * sx
                wmax_out[i, j] = -u
                dmin_out[i, j] = d0
                dmax_out[i, j] = dlast
                dmean_out[i, j] = sd / k
