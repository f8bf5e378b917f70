# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled LTI recursion kernels; see adcg.kernels for the contracts."""

import numpy as np

from libc.math cimport cos, sin


def lti_simulate(const double[::1] theta, const double[::1] u):
    cdef Py_ssize_t T = u.shape[0]
    out = np.empty(T, dtype=np.float64)
    cdef double[::1] y = out
    cdef double x1 = theta[0], x2 = theta[1]
    cdef double r = theta[2], al = theta[3], b1 = theta[4], b2 = theta[5]
    cdef double c = r * cos(al), s = r * sin(al)
    cdef double n1, n2
    cdef Py_ssize_t i
    for i in range(T):
        n1 = c * x1 - s * x2 + b1 * u[i]
        n2 = s * x1 + c * x2 + b2 * u[i]
        x1 = n1
        x2 = n2
        y[i] = x1
    return out


def lti_jacobian(const double[::1] theta, const double[::1] u):
    cdef Py_ssize_t T = u.shape[0]
    y_out = np.empty(T, dtype=np.float64)
    j_out = np.empty((T, 6), dtype=np.float64)
    cdef double[::1] y = y_out
    cdef double[:, ::1] J = j_out
    cdef double x1 = theta[0], x2 = theta[1]
    cdef double r = theta[2], al = theta[3], b1 = theta[4], b2 = theta[5]
    cdef double ca = cos(al), sa = sin(al)
    cdef double c = r * ca, s = r * sa
    # sensitivity rows: S1[k] = d x1 / d theta_k, S2[k] = d x2 / d theta_k
    cdef double S1[6]
    cdef double S2[6]
    cdef double N1[6]
    cdef double N2[6]
    cdef Py_ssize_t i, k
    for k in range(6):
        S1[k] = 0.0
        S2[k] = 0.0
    S1[0] = 1.0
    S2[1] = 1.0
    cdef double n1, n2
    for i in range(T):
        for k in range(6):
            N1[k] = c * S1[k] - s * S2[k]
            N2[k] = s * S1[k] + c * S2[k]
        # dA/dr = [[ca, -sa], [sa, ca]], dA/dalpha = r*[[-sa, -ca], [ca, -sa]]
        N1[2] += ca * x1 - sa * x2
        N2[2] += sa * x1 + ca * x2
        N1[3] += -s * x1 - c * x2
        N2[3] += c * x1 - s * x2
        N1[4] += u[i]
        N2[5] += u[i]
        n1 = c * x1 - s * x2 + b1 * u[i]
        n2 = s * x1 + c * x2 + b2 * u[i]
        x1 = n1
        x2 = n2
        for k in range(6):
            S1[k] = N1[k]
            S2[k] = N2[k]
        y[i] = x1
        for k in range(6):
            J[i, k] = S1[k]
    return y_out, j_out


def lti_grid_scores(const double[::1] r_vals, const double[::1] alpha_vals,
                    const double[::1] u, const double[::1] v):
    cdef Py_ssize_t nr = r_vals.shape[0], na = alpha_vals.shape[0]
    cdef Py_ssize_t T = u.shape[0]
    out = np.empty((nr, na, 4), dtype=np.float64)
    cdef double[:, :, ::1] S = out
    cdef Py_ssize_t ir, ia, i
    cdef double r, al, c, s, q1, q2, a1, a2, t1
    for ir in range(nr):
        r = r_vals[ir]
        for ia in range(na):
            al = alpha_vals[ia]
            c = r * cos(al)
            s = r * sin(al)
            q1 = 0.0
            q2 = 0.0
            a1 = 0.0
            a2 = 0.0
            for i in range(T - 1, -1, -1):
                # q <- A^T q + v_i e1
                t1 = c * q1 + s * q2 + v[i]
                q2 = -s * q1 + c * q2
                q1 = t1
                a1 += u[i] * q1
                a2 += u[i] * q2
            S[ir, ia, 0] = c * q1 + s * q2
            S[ir, ia, 1] = -s * q1 + c * q2
            S[ir, ia, 2] = a1
            S[ir, ia, 3] = a2
    return out
