# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels`` (same signatures and semantics)."""
import numpy as np
from libc.math cimport cos, sin

ctypedef double complex cplx

BACKEND = "compiled"

cdef Py_ssize_t TILE = 32


cdef inline cplx _mul_minus_i(cplx z) noexcept nogil:
    return z.imag - 1j * z.real


def apply_h(double t, const cplx[:, :, ::1] psi, const double[::1] sq, const double[::1] ladder, const double[::1] jz,
            double g, double detuning, double cr, double omega):
    cdef Py_ssize_t L = psi.shape[0], W = psi.shape[1], M = psi.shape[2]
    cdef Py_ssize_t k, j, c
    out = np.empty((L, W, M), dtype=np.complex128)
    cdef cplx[:, :, ::1] o = out
    cdef cplx e2 = cos(2.0 * omega * t) + 1j * sin(2.0 * omega * t)
    cdef cplx ep, em, acc
    cdef double diag, cu, cd

    with nogil:
        for k in range(L):
            diag = -detuning * jz[k]
            cu = g * ladder[k - 1] if k > 0 else 0.0
            cd = g * ladder[k] if k < L - 1 else 0.0
            ep = cr * cu * e2
            em = cr * cd * e2.conjugate()
            for j in range(W):
                for c in range(M):
                    acc = diag * psi[k, j, c]
                    if k > 0:
                        if j + 1 < W:
                            acc = acc + (cu * sq[j + 1]) * psi[k - 1, j + 1, c]
                        if j > 0:
                            acc = acc + (ep * sq[j]) * psi[k - 1, j - 1, c]
                    if k < L - 1:
                        if j > 0:
                            acc = acc + (cd * sq[j]) * psi[k + 1, j - 1, c]
                        if j + 1 < W:
                            acc = acc + (em * sq[j + 1]) * psi[k + 1, j + 1, c]
                    o[k, j, c] = _mul_minus_i(acc)
    return out


def master_rhs(double t, const cplx[:, ::1] rho, const double[::1] sq, double g, double detuning,
               double cr, double omega, rates, out=None):
    cdef Py_ssize_t W = sq.shape[0]
    cdef Py_ssize_t d = 2 * W
    cdef double gd = rates[0], gu = rates[1], gphi = rates[2], kd = rates[3], ku = rates[4]
    if out is None:
        out = np.empty((d, d), dtype=np.complex128)
    cdef cplx[:, ::1] o = out
    cdef double[::1] dn = np.empty(W)
    cdef Py_ssize_t a, b, j, m, r, c, m0
    cdef cplx e2 = cos(2.0 * omega * t) + 1j * sin(2.0 * omega * t)
    cdef cplx e2c = e2.conjugate()
    cdef cplx hr, val
    cdef double n, h_a, h_b, gab, cross_rate, decay
    cdef cplx gcr_e2 = g * cr * e2, gcr_e2c = g * cr * e2c

    for j in range(W):
        n = sq[j] * sq[j]
        dn[j] = 0.5 * kd * n + 0.5 * ku * (n + 1.0)
    cross_rate = 0.5 * (gd + gu) + 2.0 * gphi

    with nogil:
        for a in range(2):
            h_a = 0.5 * detuning if a == 0 else -0.5 * detuning
            for j in range(W):
                r = a * W + j
                for b in range(a, 2):
                    h_b = 0.5 * detuning if b == 0 else -0.5 * detuning
                    if a == b:
                        gab = gu if a == 0 else gd
                        m0 = j
                    else:
                        gab = cross_rate
                        m0 = 0
                    for m in range(m0, W):
                        c = b * W + m
                        # (H rho)[r, c]
                        hr = h_a * rho[r, c]
                        if a == 0:
                            if j > 0:
                                hr = hr + (g * sq[j]) * rho[W + j - 1, c]
                            if j + 1 < W:
                                hr = hr + (gcr_e2c * sq[j + 1]) * rho[W + j + 1, c]
                        else:
                            if j + 1 < W:
                                hr = hr + (g * sq[j + 1]) * rho[j + 1, c]
                            if j > 0:
                                hr = hr + (gcr_e2 * sq[j]) * rho[j - 1, c]
                        # minus (rho H)[r, c]
                        hr = hr - h_b * rho[r, c]
                        if b == 0:
                            if m > 0:
                                hr = hr - (g * sq[m]) * rho[r, W + m - 1]
                            if m + 1 < W:
                                hr = hr - (gcr_e2 * sq[m + 1]) * rho[r, W + m + 1]
                        else:
                            if m + 1 < W:
                                hr = hr - (g * sq[m + 1]) * rho[r, m + 1]
                            if m > 0:
                                hr = hr - (gcr_e2c * sq[m]) * rho[r, m - 1]
                        val = _mul_minus_i(hr)

                        decay = gab + dn[j] + dn[m]
                        val = val - decay * rho[r, c]
                        if a == 0 and b == 0:
                            val = val + gd * rho[W + j, W + m]
                        elif a == 1 and b == 1:
                            val = val + gu * rho[j, m]
                        if j + 1 < W and m + 1 < W:
                            val = val + (kd * sq[j + 1] * sq[m + 1]) * rho[r + 1, c + 1]
                        if j > 0 and m > 0:
                            val = val + (ku * sq[j] * sq[m]) * rho[r - 1, c - 1]

                        if c == r:
                            o[r, r] = val.real
                        else:
                            o[r, c] = val
                            o[c, r] = val.conjugate()
    return out



def hermitize(rho_arr):
    cdef cplx[:, ::1] rho = rho_arr
    cdef Py_ssize_t d = rho.shape[0]
    cdef Py_ssize_t n_tiles = (d + TILE - 1) // TILE
    cdef Py_ssize_t ti, tj, i, j, i_end, j_start, j_end
    cdef cplx v
    with nogil:
        # tiled so the transposed reads stay in cache
        for ti in range(n_tiles):
            i_end = (ti + 1) * TILE if (ti + 1) * TILE < d else d
            for tj in range(ti, n_tiles):
                j_end = (tj + 1) * TILE if (tj + 1) * TILE < d else d
                for i in range(ti * TILE, i_end):
                    j_start = tj * TILE if tj > ti else i
                    for j in range(j_start, j_end):
                        if i == j:
                            rho[i, i] = rho[i, i].real
                        else:
                            v = 0.5 * (rho[i, j] + rho[j, i].conjugate())
                            rho[i, j] = v
                            rho[j, i] = v.conjugate()
    return rho_arr
