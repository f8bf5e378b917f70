"""Convex losses on residual vectors.

A loss object provides the scalar objective ``value(r)`` and its gradient
``gradient(r)``; both act on the residual between the forward image of a
measure and the observation. The solver only ever touches losses through
this interface, so other smooth convex losses can be plugged in, but the
squared loss is the only one shipped.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Loss", "SquaredLoss", "squared_loss_value", "squared_loss_gradient"]


class Loss:
    """Interface: differentiable convex function of a residual vector."""

    def value(self, r: np.ndarray) -> float:
        raise NotImplementedError

    def gradient(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def squared_loss_value(r) -> float:
    """0.5 * sum(r_i^2)."""
    r = np.asarray(r, dtype=float)
    return 0.5 * float(r @ r)


def squared_loss_gradient(r) -> np.ndarray:
    """Gradient of the squared loss; equals the residual itself."""
    return np.asarray(r, dtype=float).copy()


class SquaredLoss(Loss):
    """The standard least-squares data fit, 0.5 * ||r||_2^2."""

    def value(self, r):
        return squared_loss_value(r)

    def gradient(self, r):
        return squared_loss_gradient(r)

    def __repr__(self):
        return "SquaredLoss()"
