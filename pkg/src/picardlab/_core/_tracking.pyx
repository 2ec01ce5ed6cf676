# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tracking kernels; see _tracking_py for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport atan2, log, fabs

cnp.import_array()


def lift_phases(double complex[:, :] w, double[:] theta0):
    cdef Py_ssize_t P = w.shape[0], K = w.shape[1], p, k
    cdef double complex a, b, r
    out = np.empty((P, K), dtype=np.float64)
    cdef double[:, :] o = out
    for p in range(P):
        o[p, 0] = theta0[p]
        for k in range(1, K):
            a = w[p, k]
            b = w[p, k - 1]
            r = a * b.conjugate()
            o[p, k] = o[p, k - 1] + atan2(r.imag, r.real)
    return out


def tracked_log_sum(double complex[:, :] w, cnp.intp_t[:] idx,
                    double complex[:, :] w_grid, double[:, :] theta_grid,
                    double[:] exps):
    cdef Py_ssize_t P = w.shape[0], M = w.shape[1], p, m, g
    cdef double complex z, ref
    cdef double e, zr, zi, rr, ri, s, a, b
    re_out = np.zeros(M, dtype=np.float64)
    im_out = np.zeros(M, dtype=np.float64)
    cdef double[:] re_acc = re_out
    cdef double[:] im_acc = im_out
    # rows are contiguous, so the node loop runs innermost
    for p in range(P):
        e = exps[p]
        if e == 0.0:
            continue
        for m in range(M):
            g = idx[m]
            z = w[p, m]
            ref = w_grid[p, g]
            zr = z.real
            zi = z.imag
            rr = zr * ref.real + zi * ref.imag
            ri = zi * ref.real - zr * ref.imag
            # log|z| scaled by the larger component: no underflow near branch points
            a = fabs(zr)
            b = fabs(zi)
            s = a if a > b else b
            if s == 0.0:
                re_acc[m] += e * log(s)  # -inf, as numpy gives
                im_acc[m] += e * theta_grid[p, g]
                continue
            a /= s
            b /= s
            re_acc[m] += e * (log(s) + 0.5 * log(a * a + b * b))
            im_acc[m] += e * (theta_grid[p, g] + atan2(ri, rr))
    return re_out + 1j * im_out
