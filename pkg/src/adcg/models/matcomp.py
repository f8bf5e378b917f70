"""Rank-one matrix completion atoms.

A source is a pair of unit vectors (u, v); its measurement is the outer
product u v^T restricted to the observed index set omega. The parameter
vector is the concatenation (u, v) of length n_rows + n_cols, living on a
product of unit spheres rather than a box, so this model ships its own
local-descent step (Riemannian projected gradient with line search) and
the solver uses it instead of the generic box routine.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.sparse as sp

from ..solver import ForwardModel

__all__ = ["MatCompModel"]

UNIT_NORM_TOL = 1e-9


class MatCompModel(ForwardModel):
    """Masked rank-one updates of an n_rows x n_cols matrix.

    Parameters
    ----------
    n_rows, n_cols : matrix shape.
    omega : iterable of observed (row, col) index pairs; duplicates and
        out-of-range indices are rejected.
    power_iters, power_tol : cap and singular-value tolerance of the power
        iteration inside the LMO.
    seed : seed of the power-iteration start vector; each LMO call reseeds
        so runs are deterministic under any call interleaving.
    """

    box = None

    def __init__(self, n_rows: int, n_cols: int, omega, power_iters: int = 300,
                 power_tol: float = 1e-9, seed: int = 0):
        self.n_rows = int(n_rows)
        self.n_cols = int(n_cols)
        om = np.asarray(list(omega), dtype=int)
        if om.ndim != 2 or om.shape[1] != 2:
            raise ValueError("omega must be a list of (row, col) pairs")
        if om.shape[0] == 0:
            raise ValueError("omega must be nonempty")
        if (om[:, 0] < 0).any() or (om[:, 0] >= self.n_rows).any() \
                or (om[:, 1] < 0).any() or (om[:, 1] >= self.n_cols).any():
            raise ValueError("omega index out of range")
        flat = om[:, 0] * self.n_cols + om[:, 1]
        if np.unique(flat).size != flat.size:
            raise ValueError("omega contains duplicate entries")
        self.rows = om[:, 0].copy()
        self.cols = om[:, 1].copy()
        self.d = om.shape[0]
        self.p = self.n_rows + self.n_cols
        self.power_iters = int(power_iters)
        self.power_tol = float(power_tol)
        self.seed = int(seed)

    def split(self, theta):
        theta = np.asarray(theta, dtype=float).reshape(-1)
        return theta[: self.n_rows], theta[self.n_rows:]

    def _check_unit(self, u, v):
        if abs(np.linalg.norm(u) - 1.0) > UNIT_NORM_TOL or abs(np.linalg.norm(v) - 1.0) > UNIT_NORM_TOL:
            raise ValueError("matrix-completion atoms require unit-norm factor vectors")

    def psi(self, theta):
        u, v = self.split(theta)
        self._check_unit(u, v)
        return u[self.rows] * v[self.cols]

    def jacobian(self, theta):
        u, v = self.split(theta)
        self._check_unit(u, v)
        J = np.zeros((self.d, self.p))
        idx = np.arange(self.d)
        J[idx, self.rows] = v[self.cols]
        J[idx, self.n_rows + self.cols] = u[self.rows]
        return J

    def psi_matrix(self, points):
        points = np.asarray(points, dtype=float)
        if points.shape[0] == 0:
            return np.zeros((self.d, 0))
        U = points[:, : self.n_rows]
        V = points[:, self.n_rows:]
        return (U[:, self.rows] * V[:, self.cols]).T

    def _scatter(self, vec):
        """Adjoint of the masking operator: place vec on the omega pattern."""
        return sp.coo_matrix(
            (vec, (self.rows, self.cols)), shape=(self.n_rows, self.n_cols)
        ).tocsr()

    def lmo(self, v):
        """Top singular pair of the scattered gradient, sign-flipped.

        Power iteration on the (extremely sparse) matrix scatter(v); the
        returned atom is (-u1, v1) with the top pair sign-normalized so
        the largest-magnitude entry of u1 is positive, which makes the
        output deterministic. Its score is -sigma_max <= 0.
        """
        v = np.asarray(v, dtype=float).reshape(-1)
        B = self._scatter(v)
        rng = np.random.default_rng(self.seed)
        if not np.any(v):
            u1 = np.zeros(self.n_rows)
            u1[0] = 1.0
            w1 = np.zeros(self.n_cols)
            w1[0] = 1.0
            return np.concatenate([-u1, w1])
        w = rng.standard_normal(self.n_cols)
        w /= np.linalg.norm(w)
        sigma_prev = np.inf
        converged = False
        for _ in range(self.power_iters):
            bu = B @ w
            nu = np.linalg.norm(bu)
            if nu == 0.0:
                w = rng.standard_normal(self.n_cols)
                w /= np.linalg.norm(w)
                continue
            u1 = bu / nu
            bw = B.T @ u1
            sigma = float(np.linalg.norm(bw))
            if sigma == 0.0:
                break
            w = bw / sigma
            if abs(sigma - sigma_prev) <= self.power_tol * max(1.0, sigma):
                converged = True
                break
            sigma_prev = sigma
        if not converged:
            warnings.warn("matrix-completion LMO power iteration hit its cap")
        bu = B @ w
        nu = np.linalg.norm(bu)
        u1 = bu / nu if nu > 0 else np.eye(self.n_rows)[0]
        peak = int(np.argmax(np.abs(u1)))
        if u1[peak] < 0:
            u1, w = -u1, -w
        return np.concatenate([-u1, w])

    def local_descent_step(self, points, weights, y, loss):
        """One Riemannian gradient step with Armijo line search.

        The Euclidean gradient in each factor is projected onto the sphere
        tangent space, all atoms move jointly along the negative projected
        gradient, then every factor is renormalized. Returns (new_points,
        improved); the objective never increases.
        """
        pts = np.asarray(points, dtype=float)
        w = np.asarray(weights, dtype=float)
        n = self.n_rows
        r = self.psi_matrix(pts) @ w - y
        fval = loss.value(r)
        G = self._scatter(loss.gradient(r))

        U = pts[:, :n]
        V = pts[:, n:]
        gu = (G @ V.T).T * w[:, None]
        gv = (G.T @ U.T).T * w[:, None]
        gu -= np.sum(gu * U, axis=1, keepdims=True) * U  # tangent projection
        gv -= np.sum(gv * V, axis=1, keepdims=True) * V
        grads = np.hstack([gu, gv])
        gnorm = float(np.max(np.abs(grads)))
        if gnorm == 0.0:
            return pts, False

        alpha = 1.0 / (gnorm * np.sqrt(self.d))
        for _ in range(40):
            cand = pts - alpha * grads
            cu = cand[:, :n]
            cv = cand[:, n:]
            cu /= np.linalg.norm(cu, axis=1, keepdims=True)
            cv /= np.linalg.norm(cv, axis=1, keepdims=True)
            f_cand = loss.value(self.psi_matrix(cand) @ w - y)
            if fval - f_cand > 1e-4 * alpha * float(np.sum(grads * grads)):
                return cand, True
            alpha *= 0.5
        return pts, False
