# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Hill-model stepper; mirrors ``_march_py.march_hill`` line for line."""
import numpy as np

from libc.math cimport pow, isfinite, NAN


cdef inline double _hermite(double y0, double d0, double y1, double d1,
                            double s, double h) nogil:
    cdef double s2 = s * s
    cdef double s3 = s2 * s
    return ((2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * h * d0
            + (3.0 * s2 - 2.0 * s3) * y1
            + (s3 - s2) * h * d1)


cdef inline double _f(double r, double b, double K, double gamma,
                      double y, double y_lag) nogil:
    if y_lag < 0.0:
        return NAN
    return (r / (1.0 + pow(y_lag / K, gamma)) - b) * y


cdef inline double _lag(const double[::1] g, const double[::1] hist,
                        double[::1] N, double[::1] D, Py_ssize_t j,
                        Py_ssize_t i, double h, int have_trial,
                        double ty, double td) nogil:
    cdef double gj = g[j]
    cdef double ti = i * h
    cdef Py_ssize_t k
    if gj <= 0.0:
        return hist[j]
    if gj <= ti:
        k = <Py_ssize_t>(gj / h)
        if k >= i:
            k = i - 1
        return _hermite(N[k], D[k], N[k + 1], D[k + 1], (gj - k * h) / h, h)
    if not have_trial:
        return N[i] + D[i] * (gj - ti)
    return _hermite(N[i], D[i], ty, td, (gj - ti) / h, h)


def march_hill(double h, double N0, const double[::1] g, const double[::1] hist,
               const double[::1] r, const double[::1] b, const double[::1] K,
               double gamma, double floor, bint check, int max_lag_iter):
    cdef Py_ssize_t n = (g.shape[0] - 1) // 2
    N_arr = np.zeros(n + 1)
    D_arr = np.zeros(n + 1)
    cdef double[::1] N = N_arr
    cdef double[::1] D = D_arr
    cdef double half = 0.5 * h
    cdef double y, k1, k2, k3, k4, y2, y3, y4, y_new, lm, le, ti, ty = 0.0, td = 0.0
    cdef Py_ssize_t i, jm, je
    cdef int rounds, it, have_trial
    cdef int status = 0
    cdef Py_ssize_t fail = n

    N[0] = N0
    D[0] = _f(r[0], b[0], K[0], gamma, N0, hist[0])
    with nogil:
        for i in range(n):
            y = N[i]
            k1 = D[i]
            ti = i * h
            jm = 2 * i + 1
            je = 2 * i + 2
            rounds = 1
            if g[jm] > ti or g[je] > ti:
                rounds = max_lag_iter if max_lag_iter > 1 else 1
            have_trial = 0
            for it in range(rounds):
                y2 = y + half * k1
                lm = _lag(g, hist, N, D, jm, i, h, have_trial, ty, td)
                k2 = _f(r[jm], b[jm], K[jm], gamma, y2, lm)
                y3 = y + half * k2
                k3 = _f(r[jm], b[jm], K[jm], gamma, y3, lm)
                y4 = y + h * k3
                le = _lag(g, hist, N, D, je, i, h, have_trial, ty, td)
                k4 = _f(r[je], b[je], K[je], gamma, y4, le)
                y_new = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                if check and not (y2 > floor and y3 > floor and y4 > floor and y_new > floor):
                    N[i + 1] = y_new
                    status = 1
                    fail = i + 1
                    break
                le = _lag(g, hist, N, D, je, i, h, 1, y_new, k4)
                td = _f(r[je], b[je], K[je], gamma, y_new, le)
                ty = y_new
                have_trial = 1
            if status:
                break
            N[i + 1] = ty
            D[i + 1] = td
            if not isfinite(ty):
                status = 1
                fail = i + 1
                break
    return N_arr, D_arr, status, fail
