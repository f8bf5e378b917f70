"""Linear time-invariant system identification atoms.

Each source is a two-state linear system parameterized by
theta = (x0_1, x0_2, r, alpha, B_1, B_2): the state matrix is the rotation
by ``alpha`` scaled by ``r`` (so the atom is a damped oscillatory mode),
the input matrix is B, the initial state is x0 and the output picks the
first state coordinate. The model output is the response to a fixed input
sequence u over the horizon T:

    x_{t+1} = A x_t + B u_t,   y_t = x_t[0]   (t = 1..T)

with u_0 the first stored input sample. Feasible parameters keep x0 and B
in the sup-norm unit ball, r in [0, 1] and alpha in [0, pi].
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..solver import ForwardModel

__all__ = ["LTIModel"]


class LTIModel(ForwardModel):
    """Response of weighted two-state linear systems to a fixed input."""

    def __init__(self, u, r_grid: int = 50, alpha_grid: int = 50,
                 lmo_polish_steps: int = 50):
        self.u = np.ascontiguousarray(u, dtype=float).reshape(-1)
        if self.u.size < 1:
            raise ValueError("input sequence must be nonempty")
        self.T = self.u.size
        self.d = self.T
        self.p = 6
        self.box = np.array(
            [[-1.0, 1.0], [-1.0, 1.0], [0.0, 1.0], [0.0, np.pi], [-1.0, 1.0], [-1.0, 1.0]]
        )
        self._r_vals = np.linspace(0.0, 1.0, int(r_grid))
        self._alpha_vals = np.linspace(0.0, np.pi, int(alpha_grid))
        self.lmo_polish_steps = int(lmo_polish_steps)

    def psi(self, theta):
        return kernels.lti_simulate(theta, self.u)

    def jacobian(self, theta):
        _, J = kernels.lti_jacobian(theta, self.u)
        return J

    def lmo(self, v):
        """Grid over (r, alpha), closed-form vertex in (x0, B), then polish.

        At fixed (r, alpha) the output is linear in (x0, B), so the inner
        minimization of <psi, v> over the sup-norm ball is attained at the
        vertex with components -sign(G^T v); zero scores break toward +1.
        All six coordinates are then polished jointly by projected
        gradient with Armijo backtracking, keeping the best point seen.
        """
        v = np.asarray(v, dtype=float).reshape(-1)
        scores = kernels.lti_grid_scores(self._r_vals, self._alpha_vals, self.u, v)
        vert = np.where(scores > 0.0, -1.0, 1.0)
        obj = np.sum(scores * vert, axis=2)
        ir, ia = np.unravel_index(int(np.argmin(obj)), obj.shape)
        theta = np.array(
            [
                vert[ir, ia, 0],
                vert[ir, ia, 1],
                self._r_vals[ir],
                self._alpha_vals[ia],
                vert[ir, ia, 2],
                vert[ir, ia, 3],
            ]
        )
        best_val = float(obj[ir, ia])

        lo, hi = self.box[:, 0], self.box[:, 1]
        val = best_val
        best = theta.copy()
        alpha = None
        for _ in range(self.lmo_polish_steps):
            grad = self.jacobian(theta).T @ v
            gnorm = float(np.max(np.abs(grad)))
            if gnorm == 0.0:
                break
            if alpha is None:
                alpha = 0.1 / gnorm
            moved = False
            for _ in range(30):
                cand = np.clip(theta - alpha * grad, lo, hi)
                diff = cand - theta
                if not np.any(diff):
                    break
                f_cand = float(self.psi(cand) @ v)
                if f_cand <= val + 1e-4 * float(grad @ diff):
                    theta, val = cand, f_cand
                    alpha *= 2.0
                    moved = True
                    break
                alpha *= 0.5
            if not moved:
                break
        if val <= best_val:
            best, best_val = theta, val
        return best
