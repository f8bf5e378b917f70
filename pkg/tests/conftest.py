"""Shared toy models and independent oracles."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from adcg.solver import ForwardModel


class LineModel(ForwardModel):
    """d = 1, psi(theta) = theta on [-1, 1], exact closed-form LMO."""

    d = 1
    p = 1
    box = np.array([[-1.0, 1.0]])
    lmo_exact = True

    def psi(self, theta):
        return np.array([float(theta[0])])

    def jacobian(self, theta):
        return np.array([[1.0]])

    def lmo(self, v):
        return np.array([-1.0]) if v[0] >= 0 else np.array([1.0])


class ParabolaModel(ForwardModel):
    """d = 2, psi(theta) = (theta, theta^2) on [-2, 4]; grid + polish LMO."""

    d = 2
    p = 1
    box = np.array([[-2.0, 4.0]])

    def psi(self, theta):
        t = float(theta[0])
        return np.array([t, t * t])

    def jacobian(self, theta):
        t = float(theta[0])
        return np.array([[1.0], [2.0 * t]])

    def lmo(self, v):
        # quadratic in theta: closed form over candidates
        cands = [self.box[0, 0], self.box[0, 1]]
        if v[1] != 0:
            t = -v[0] / (2.0 * v[1])
            if self.box[0, 0] <= t <= self.box[0, 1]:
                cands.append(t)
        vals = [v[0] * t + v[1] * t * t for t in cands]
        return np.array([cands[int(np.argmin(vals))]])


class CubicCurveModel(ForwardModel):
    """d = 3, psi(theta) = (theta, theta^2, theta^3) on [-1, 1].

    The linear minimization is a cubic polynomial on an interval, solved
    exactly from the roots of its derivative, so the LMO is exact.
    """

    d = 3
    p = 1
    box = np.array([[-1.0, 1.0]])
    lmo_exact = True

    def psi(self, theta):
        t = float(theta[0])
        return np.array([t, t * t, t * t * t])

    def jacobian(self, theta):
        t = float(theta[0])
        return np.array([[1.0], [2.0 * t], [3.0 * t * t]])

    def lmo(self, v):
        cands = [self.box[0, 0], self.box[0, 1]]
        # derivative of v1 t + v2 t^2 + v3 t^3
        roots = np.roots([3.0 * v[2], 2.0 * v[1], v[0]])
        for r in roots:
            if abs(r.imag) < 1e-12 and self.box[0, 0] <= r.real <= self.box[0, 1]:
                cands.append(float(r.real))
        vals = [v[0] * t + v[1] * t * t + v[2] * t * t * t for t in cands]
        return np.array([cands[int(np.argmin(vals))]])


@pytest.fixture
def line_model():
    return LineModel()


@pytest.fixture
def cubic_model():
    return CubicCurveModel()


# -- independent oracles -----------------------------------------------------


def project_capped_simplex_oracle(w, tau):
    """Active-set enumeration of the projection onto {x >= 0, sum x <= tau}.

    For every zero set and mass-constraint status the KKT system has a
    closed form; the feasible candidate closest to w is the projection.
    """
    w = np.asarray(w, dtype=float)
    m = w.size
    best = None
    best_d = np.inf
    for free in itertools.chain.from_iterable(
        itertools.combinations(range(m), k) for k in range(m + 1)
    ):
        free = list(free)
        for mass_tight in (False, True):
            x = np.zeros(m)
            if free:
                if mass_tight:
                    lam = (np.sum(w[free]) - tau) / len(free)
                    x[free] = w[free] - lam
                else:
                    x[free] = w[free]
            elif mass_tight:
                continue
            if np.min(x) < -1e-12 or np.sum(x) > tau + 1e-12:
                continue
            dist = np.linalg.norm(x - w)
            if dist < best_d - 1e-15:
                best_d = dist
                best = x
    return best


def solve_weights_oracle(A, y, tau):
    """Optimal objective of the constrained weight problem by enumeration.

    Solves the equality-constrained least squares system for every support
    set with the mass constraint slack or tight, keeps feasible candidates
    and returns the best objective (the optimum's active set is always
    enumerated).
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    m = A.shape[1]
    best = 0.5 * float(y @ y)  # w = 0 candidate
    best_w = np.zeros(m)
    for k in range(1, m + 1):
        for free in itertools.combinations(range(m), k):
            free = list(free)
            As = A[:, free]
            gram = As.T @ As
            rhs = As.T @ y
            # mass slack
            ws, *_ = np.linalg.lstsq(gram, rhs, rcond=None)
            cand = [ws]
            # mass tight: KKT with multiplier
            kkt = np.zeros((k + 1, k + 1))
            kkt[:k, :k] = gram
            kkt[:k, k] = 1.0
            kkt[k, :k] = 1.0
            b = np.concatenate([rhs, [tau]])
            sol, *_ = np.linalg.lstsq(kkt, b, rcond=None)
            cand.append(sol[:k])
            for wf in cand:
                if np.min(wf) < -1e-9 or np.sum(wf) > tau + 1e-9:
                    continue
                w = np.zeros(m)
                w[free] = np.clip(wf, 0.0, None)
                obj = 0.5 * float(np.sum((A @ w - y) ** 2))
                if obj < best:
                    best = obj
                    best_w = w
    return best, best_w


def central_fd_jacobian(fun, x, h=1e-6):
    """Central finite differences of a vector function, column per coordinate."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((fun(x + e) - fun(x - e)) / (2.0 * h))
    return np.column_stack(cols)
