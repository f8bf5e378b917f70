"""2-D superresolution with an integrated (pixel-averaged) Gaussian PSF.

A point source at position (x, y), given in the same length unit as
``pixel_size`` (nanometers in the shipped experiments), produces on pixel
(ix, iy) the exact integral of an isotropic Gaussian over the pixel area.
The integral separates into a product of CDF differences per axis, which
makes images, Jacobians and grid scores cheap outer products.

Images are stored row-major: the flat index of pixel (ix, iy) is
iy * grid_w + ix, i.e. frames are (grid_h, grid_w) arrays raveled in C
order.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf

from ..solver import ForwardModel

__all__ = ["SuperresModel"]

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_INV_SQRT2PI = 1.0 / np.sqrt(2.0 * np.pi)


class SuperresModel(ForwardModel):
    """Pixelated image of weighted point sources.

    Parameters
    ----------
    grid_w, grid_h : pixel counts along x and y.
    pixel_size : physical pixel pitch (nm per pixel).
    sigma : PSF standard deviation, in the same unit as pixel_size.
    lmo_polish_steps : cap on the projected-gradient polish after the
        coarse grid search in the LMO.
    """

    def __init__(self, grid_w: int, grid_h: int, pixel_size: float = 100.0,
                 sigma: float = 100.0, lmo_polish_steps: int = 100):
        if grid_w < 1 or grid_h < 1:
            raise ValueError("grid dimensions must be positive")
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        if pixel_size <= 0:
            raise ValueError("pixel_size must be positive")
        self.grid_w = int(grid_w)
        self.grid_h = int(grid_h)
        self.pixel_size = float(pixel_size)
        self.sigma = float(sigma)
        self.lmo_polish_steps = int(lmo_polish_steps)
        self.d = self.grid_w * self.grid_h
        self.p = 2
        self.box = np.array(
            [[0.0, self.grid_w * self.pixel_size],
             [0.0, self.grid_h * self.pixel_size]]
        )
        self._edges_x = np.arange(self.grid_w + 1) * self.pixel_size
        self._edges_y = np.arange(self.grid_h + 1) * self.pixel_size
        self._cand_profiles = None  # lazy (Px, Py) for the LMO coarse grid

    # -- per-axis pixel responses ------------------------------------------

    def _cdf(self, z):
        return 0.5 * (1.0 + erf(z * _INV_SQRT2 / self.sigma))

    def _pdf(self, z):
        return np.exp(-0.5 * (z / self.sigma) ** 2) * _INV_SQRT2PI / self.sigma

    def _profile(self, edges, pos):
        """Integral of the unit Gaussian at ``pos`` over each pixel interval."""
        c = self._cdf(edges - pos)
        return c[1:] - c[:-1]

    def _profile_deriv(self, edges, pos):
        """Derivative of ``_profile`` in the source position."""
        p = self._pdf(edges - pos)
        return p[:-1] - p[1:]

    # -- model contract ------------------------------------------------------

    def psi(self, theta):
        x, y = float(theta[0]), float(theta[1])
        px = self._profile(self._edges_x, x)
        py = self._profile(self._edges_y, y)
        return np.outer(py, px).ravel()

    def jacobian(self, theta):
        x, y = float(theta[0]), float(theta[1])
        px = self._profile(self._edges_x, x)
        py = self._profile(self._edges_y, y)
        dpx = self._profile_deriv(self._edges_x, x)
        dpy = self._profile_deriv(self._edges_y, y)
        return np.column_stack([np.outer(py, dpx).ravel(), np.outer(dpy, px).ravel()])

    def _candidate_profiles(self):
        if self._cand_profiles is None:
            cx = (np.arange(self.grid_w) + 0.5) * self.pixel_size
            cy = (np.arange(self.grid_h) + 0.5) * self.pixel_size
            px = np.stack([self._profile(self._edges_x, x) for x in cx])
            py = np.stack([self._profile(self._edges_y, y) for y in cy])
            self._cand_profiles = (cx, cy, px, py)
        return self._cand_profiles

    def lmo(self, v):
        """Coarse grid (one candidate per pixel) followed by local polish.

        The grid scores reduce to two matrix products thanks to the
        separable PSF. The polish is projected gradient with Armijo
        backtracking on <psi(theta), v>; the returned point never scores
        worse than the best grid candidate.
        """
        v = np.asarray(v, dtype=float)
        V = v.reshape(self.grid_h, self.grid_w)
        cx, cy, px_mat, py_mat = self._candidate_profiles()
        scores = py_mat @ V @ px_mat.T  # (n_cy, n_cx)
        iy, ix = np.unravel_index(int(np.argmin(scores)), scores.shape)
        best = np.array([cx[ix], cy[iy]])
        best_val = float(scores[iy, ix])

        lo, hi = self.box[:, 0], self.box[:, 1]
        theta = best.copy()
        val = best_val
        alpha = None
        for _ in range(self.lmo_polish_steps):
            px = self._profile(self._edges_x, theta[0])
            py = self._profile(self._edges_y, theta[1])
            gx = float(py @ V @ self._profile_deriv(self._edges_x, theta[0]))
            gy = float(self._profile_deriv(self._edges_y, theta[1]) @ V @ px)
            grad = np.array([gx, gy])
            gnorm = float(np.max(np.abs(grad)))
            if gnorm == 0.0:
                break
            if alpha is None:
                alpha = 0.5 * self.pixel_size / gnorm
            moved = False
            for _ in range(30):
                cand = np.clip(theta - alpha * grad, lo, hi)
                diff = cand - theta
                if not np.any(diff):
                    break
                pxc = self._profile(self._edges_x, cand[0])
                pyc = self._profile(self._edges_y, cand[1])
                f_cand = float(pyc @ V @ pxc)
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
