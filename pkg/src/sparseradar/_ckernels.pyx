# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: peak scan, matched-filter backprojection, IF chirp
accumulation. Mirrors sparseradar._kernels_np; keep both in lockstep."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, floor, INFINITY

cnp.import_array()

cdef double TWO_PI = 6.283185307179586476925287


def peak_scan(object x_in):
    """Interior local maxima with topographic prominences (see NumPy ref)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] peaks = np.empty(n // 2 + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] lefts = np.empty(n // 2 + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] rights = np.empty(n // 2 + 1, dtype=np.int64)
    cdef Py_ssize_t count = 0
    cdef Py_ssize_t i = 1, j, k
    cdef double h, left_min, right_min

    while i < n - 1:
        if x[i] > x[i - 1]:
            j = i
            while j + 1 < n and x[j + 1] == x[i]:
                j += 1
            if j + 1 < n and x[j + 1] < x[i]:
                peaks[count] = (i + j) // 2
                lefts[count] = i
                rights[count] = j
                count += 1
            i = j + 1
        else:
            i += 1

    cdef cnp.ndarray[cnp.float64_t, ndim=1] proms = np.empty(count, dtype=np.float64)
    cdef Py_ssize_t p
    for p in range(count):
        h = x[lefts[p]]
        left_min = INFINITY
        k = lefts[p] - 1
        while k >= 0 and x[k] < h:
            if x[k] < left_min:
                left_min = x[k]
            k -= 1
        right_min = INFINITY
        k = rights[p] + 1
        while k < n and x[k] < h:
            if x[k] < right_min:
                right_min = x[k]
            k += 1
        proms[p] = h - (left_min if left_min > right_min else right_min)
    return peaks[:count].copy(), proms


def backproject(object sif_in, object tx_in, object rx_in, object ranges_in,
                object us_in, double f_c, double bins_per_second, double inv_c):
    """Near-field matched-filter accumulation (see NumPy ref for semantics)."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] sif = np.ascontiguousarray(sif_in, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tx = np.ascontiguousarray(tx_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rx = np.ascontiguousarray(rx_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] r = np.ascontiguousarray(ranges_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] u = np.ascontiguousarray(us_in, dtype=np.float64)
    cdef Py_ssize_t n_ch = sif.shape[0], n_bins = sif.shape[1]
    cdef Py_ssize_t n_r = r.shape[0], n_u = u.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.zeros((n_r, n_u), dtype=np.complex128)
    cdef Py_ssize_t ir, iu, m, k
    cdef double x, y, uy, d, tau, b, frac, phase, zr, zi, c_, s_
    cdef double complex z

    for ir in range(n_r):
        for iu in range(n_u):
            uy = 1.0 - u[iu] * u[iu]
            if uy < 0.0:
                uy = 0.0
            x = -r[ir] * u[iu]
            y = r[ir] * sqrt(uy)
            for m in range(n_ch):
                d = sqrt((x - tx[m]) * (x - tx[m]) + y * y) \
                    + sqrt((x - rx[m]) * (x - rx[m]) + y * y)
                tau = d * inv_c
                b = tau * bins_per_second
                if b < 0.0 or b >= n_bins - 1:
                    continue
                k = <Py_ssize_t>floor(b)
                frac = b - k
                z = sif[m, k] * (1.0 - frac) + sif[m, k + 1] * frac
                phase = -TWO_PI * f_c * tau
                c_ = cos(phase)
                s_ = sin(phase)
                zr = z.real
                zi = z.imag
                out[ir, iu] += (zr * c_ - zi * s_) + 1j * (zr * s_ + zi * c_)
    return out


def accumulate_if(object out_in, object tau_in, object amp_in, object t_in,
                  double mu, double f_c):
    """Add one chirp's IF contribution in place. Requires uniform t spacing;
    uses a complex-rotation recurrence along fast time."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = out_in
    cdef cnp.ndarray[cnp.float64_t, ndim=2] tau = np.ascontiguousarray(tau_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] amp = np.ascontiguousarray(amp_in, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t = np.ascontiguousarray(t_in, dtype=np.float64)
    cdef Py_ssize_t n_ch = out.shape[0], n_s = out.shape[1], n_t = amp.shape[0]
    cdef Py_ssize_t m, k, i
    cdef double dt = t[1] - t[0] if n_s > 1 else 0.0
    cdef double phi0, dphi
    cdef double complex z, w, a

    for m in range(n_ch):
        for k in range(n_t):
            a = amp[k]
            phi0 = TWO_PI * (mu * tau[m, k] * t[0] + f_c * tau[m, k])
            dphi = TWO_PI * mu * tau[m, k] * dt
            z = cos(phi0) + 1j * sin(phi0)
            w = cos(dphi) + 1j * sin(dphi)
            for i in range(n_s):
                out[m, i] += a * z
                z = z * w
