# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Semantics must match ``_kernels_py`` exactly."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

cdef double EPS = 2.220446049250313e-16


cdef inline double cabs_(double complex z) nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


def aberth(const double complex[::1] coeffs, double complex[::1] z0, int maxiter, double steptol):
    cdef Py_ssize_t deg = coeffs.shape[0] - 1
    cdef Py_ssize_t i, j, k
    cdef int it = 0
    cdef bint done = deg == 0
    cdef double complex p, dp, zi, ratio, s, w, d
    cdef double az, mag, bound
    z_arr = np.array(z0, dtype=np.complex128, copy=True)
    cdef double complex[::1] z = z_arr
    w_arr = np.zeros(deg, dtype=np.complex128)
    cdef double complex[::1] ws = w_arr
    conv_arr = np.zeros(deg, dtype=np.uint8)
    cdef unsigned char[::1] conv = conv_arr
    with nogil:
        while it < maxiter and not done:
            it += 1
            for i in range(deg):
                ws[i] = 0
                if conv[i]:
                    continue
                zi = z[i]
                az = cabs_(zi)
                p = coeffs[deg]
                dp = 0
                mag = cabs_(coeffs[deg])
                for k in range(deg - 1, -1, -1):
                    dp = dp * zi + p
                    p = p * zi + coeffs[k]
                    mag = mag * az + cabs_(coeffs[k])
                if cabs_(p) <= 4.0 * deg * EPS * mag:
                    conv[i] = 1
                    continue
                if dp == 0:
                    ws[i] = 1e-8 * (1.0 + az)
                    continue
                ratio = p / dp
                s = 0
                for j in range(deg):
                    if j != i:
                        d = zi - z[j]
                        if d != 0:
                            s = s + 1.0 / d
                w = ratio / (1.0 - ratio * s)
                ws[i] = w
                if cabs_(w) < steptol * (1.0 + az):
                    conv[i] = 1
            done = True
            for i in range(deg):
                z[i] = z[i] - ws[i]
                if not conv[i]:
                    done = False
    return z_arr, it, bool(np.all(conv_arr))


def walk_shots(const double[:, ::1] u, const double[:, ::1] cdf, const long long[::1] target):
    cdef Py_ssize_t shots = u.shape[0]
    cdef Py_ssize_t stages = cdf.shape[0]
    cdef Py_ssize_t K = cdf.shape[1]
    cdef Py_ssize_t i, s, k
    cdef double x
    hist_arr = np.zeros((stages, K + 1), dtype=np.int64)
    cdef long long[:, ::1] hist = hist_arr
    with nogil:
        for i in range(shots):
            for s in range(stages):
                x = u[i, s]
                k = 0
                while k < K and cdf[s, k] <= x:
                    k += 1
                hist[s, k] += 1
                if k != target[s]:
                    break
    return hist_arr
