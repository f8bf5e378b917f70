"""Numpy fallback for the LTI recursion kernels.

Same contracts as the compiled module adcg._ltikern. The single-trajectory
routines run the time loop in Python; the grid-score routine is batched
over all (r, alpha) pairs so only the time loop is interpreted.
"""

import numpy as np


def _system(theta):
    x1, x2, r, al, b1, b2 = (float(v) for v in theta)
    c, s = r * np.cos(al), r * np.sin(al)
    return x1, x2, np.array([[c, -s], [s, c]]), np.array([b1, b2])


def lti_simulate(theta, u):
    """Output sequence of the two-state system x' = A x + B u, y = x[0]."""
    x1, x2, A, B = _system(theta)
    x = np.array([x1, x2])
    T = u.shape[0]
    y = np.empty(T)
    for i in range(T):
        x = A @ x + B * u[i]
        y[i] = x[0]
    return y


def lti_jacobian(theta, u):
    """Output and its (T, 6) Jacobian via the forward sensitivity recursion.

    Parameter order: (x0_1, x0_2, r, alpha, B_1, B_2). Sensitivities obey
    S' = A S + dA/dp x + dB/dp u with S_0 = dx_0/dp.
    """
    x1, x2, r, al, b1, b2 = (float(v) for v in theta)
    c, s = np.cos(al), np.sin(al)
    A = r * np.array([[c, -s], [s, c]])
    dA_dr = np.array([[c, -s], [s, c]])
    dA_da = r * np.array([[-s, -c], [c, -s]])
    x = np.array([x1, x2])
    S = np.zeros((2, 6))
    S[0, 0] = 1.0
    S[1, 1] = 1.0
    T = u.shape[0]
    y = np.empty(T)
    J = np.empty((T, 6))
    for i in range(T):
        S_new = A @ S
        S_new[:, 2] += dA_dr @ x
        S_new[:, 3] += dA_da @ x
        S_new[0, 4] += u[i]
        S_new[1, 5] += u[i]
        x = A @ x + np.array([b1, b2]) * u[i]
        S = S_new
        y[i] = x[0]
        J[i] = S[0]
    return y, J


def lti_grid_scores(r_vals, alpha_vals, u, v):
    """<G(r,a) e_j, v> for every grid pair and each of the 4 linear inputs.

    The output at fixed (r, alpha) is linear in (x0, B); column j of
    G(r, alpha) is the output for the j-th unit vector of (x0_1, x0_2,
    B_1, B_2). One backward (adjoint) pass per grid point yields all four
    inner products: with q_t = v_t C^T + A^T q_{t+1},

        G^T v = (A^T q_0 ; sum_t u_t q_{t+1}).

    Returns an array of shape (len(r_vals), len(alpha_vals), 4).
    """
    r = np.asarray(r_vals, dtype=float)
    a = np.asarray(alpha_vals, dtype=float)
    rg, ag = np.meshgrid(r, a, indexing="ij")
    rg = rg.reshape(-1)
    ag = ag.reshape(-1)
    c = rg * np.cos(ag)
    s = rg * np.sin(ag)
    T = u.shape[0]
    q1 = np.zeros(rg.size)
    q2 = np.zeros(rg.size)
    acc1 = np.zeros(rg.size)
    acc2 = np.zeros(rg.size)
    for i in range(T - 1, -1, -1):
        # q <- A^T q + v_i e1 with A = [[c, -s], [s, c]]
        q1, q2 = c * q1 + s * q2 + v[i], -s * q1 + c * q2
        acc1 += u[i] * q1
        acc2 += u[i] * q2
    sx1 = c * q1 + s * q2
    sx2 = -s * q1 + c * q2
    out = np.stack([sx1, sx2, acc1, acc2], axis=-1)
    return out.reshape(r.size, a.size, 4)
