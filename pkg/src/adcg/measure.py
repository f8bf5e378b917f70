"""Atomic measures on a parameter space and the linear forward operator.

An atomic measure is a finite list of (weight, parameter point) pairs with
nonnegative weights. It is the iterate of every solver in this package.
Measures are immutable after construction and all operations here are pure
functions, so they are safe to share across parallel workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "AtomicMeasure",
    "Observation",
    "CaratheodoryError",
    "apply_forward",
    "residual",
    "prune_zero_weights",
    "merge_close_atoms",
    "caratheodory_prune",
]

# Weights more negative than this (relative to total mass) are a bug in the
# caller; anything smaller is clipped to zero at construction.
_NEG_WEIGHT_SLACK = 1e-12


class CaratheodoryError(RuntimeError):
    """Raised when no usable null-space direction can be found.

    Signals ill-conditioning of the stacked feature matrix; callers may
    choose to skip pruning for that iterate.
    """


class AtomicMeasure:
    """Nonnegative combination of point masses, sum_i w_i * delta_{theta_i}.

    Stored as a weight vector of shape (m,) and a point matrix of shape
    (m, p); both arrays are frozen. Atom order is preserved by every
    operation in this module (insertion order is the serialization order).
    """

    __slots__ = ("weights", "points")

    def __init__(self, weights, points):
        w = np.array(weights, dtype=float).reshape(-1)
        th = np.array(points, dtype=float)
        if th.ndim == 1:
            th = th.reshape(-1, 1) if w.size else th.reshape(0, 1)
        if th.ndim != 2 or th.shape[0] != w.size:
            raise ValueError(
                f"points must have shape (m, p) with m == len(weights); "
                f"got weights {w.shape} and points {th.shape}"
            )
        scale = max(1.0, float(np.sum(np.abs(w)))) if w.size else 1.0
        if w.size and float(np.min(w)) < -_NEG_WEIGHT_SLACK * scale:
            raise ValueError(f"negative atom weight: {float(np.min(w))!r}")
        np.clip(w, 0.0, None, out=w)
        w.setflags(write=False)
        th.setflags(write=False)
        self.weights = w
        self.points = th

    @classmethod
    def empty(cls, p: int) -> "AtomicMeasure":
        return cls(np.zeros(0), np.zeros((0, p)))

    def __len__(self) -> int:
        return self.weights.size

    @property
    def is_empty(self) -> bool:
        return self.weights.size == 0

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    def with_weights(self, weights) -> "AtomicMeasure":
        """Same support, new weights."""
        return AtomicMeasure(weights, self.points)

    def to_json_dict(self) -> dict:
        return {
            "atoms": [
                {"w": float(w), "theta": [float(c) for c in th]}
                for w, th in zip(self.weights, self.points)
            ]
        }

    @classmethod
    def from_json_dict(cls, data: dict, p: int | None = None) -> "AtomicMeasure":
        atoms = data["atoms"]
        if not atoms:
            return cls.empty(p if p is not None else 1)
        weights = [a["w"] for a in atoms]
        points = [a["theta"] for a in atoms]
        return cls(weights, points)

    def __repr__(self):
        return f"AtomicMeasure(m={len(self)}, mass={self.total_mass:.6g})"


@dataclass(frozen=True)
class Observation:
    """Measurement vector y of length d."""

    y: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.y, dtype=float).reshape(-1)
        object.__setattr__(self, "y", arr)

    @property
    def d(self) -> int:
        return self.y.size


def _observation_vector(obs) -> np.ndarray:
    if isinstance(obs, Observation):
        return obs.y
    return np.asarray(obs, dtype=float).reshape(-1)


def apply_forward(model, mu: AtomicMeasure) -> np.ndarray:
    """Forward image of a measure: sum_i w_i * psi(theta_i).

    Linear in the weights by construction; the empty measure maps to the
    zero vector.
    """
    if mu.is_empty:
        return np.zeros(model.d)
    if mu.points.shape[1] != model.p:
        raise ValueError(
            f"atom parameter length {mu.points.shape[1]} does not match "
            f"model parameter dimension {model.p}"
        )
    return model.psi_matrix(mu.points) @ mu.weights


def residual(model, mu: AtomicMeasure, obs) -> np.ndarray:
    """apply_forward(model, mu) - y."""
    y = _observation_vector(obs)
    if y.size != model.d:
        raise ValueError(f"observation length {y.size} != model output dimension {model.d}")
    return apply_forward(model, mu) - y


def prune_zero_weights(mu: AtomicMeasure, tol: float) -> AtomicMeasure:
    """Drop atoms whose weight is <= tol; remaining atoms are untouched."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    keep = mu.weights > tol
    if keep.all():
        return mu
    return AtomicMeasure(mu.weights[keep], mu.points[keep])


def merge_close_atoms(mu: AtomicMeasure, box=None, tol: float = 1e-12) -> AtomicMeasure:
    """Merge atoms whose points coincide up to ``tol``.

    Distances are measured in box-normalized coordinates when a box is
    given (rows (lo, hi) per coordinate), otherwise in raw coordinates.
    Weights of merged atoms are summed onto the earliest atom. This keeps
    the Gram matrix of the weight subproblem nonsingular.
    """
    m = len(mu)
    if m <= 1:
        return mu
    pts = mu.points
    if box is not None:
        lo = np.asarray(box, dtype=float)[:, 0]
        span = np.asarray(box, dtype=float)[:, 1] - lo
        span = np.where(span > 0, span, 1.0)
        pts = (pts - lo) / span
    keep: list[int] = []
    weights = mu.weights.copy()
    for i in range(m):
        merged = False
        for j in keep:
            if np.max(np.abs(pts[i] - pts[j])) < tol:
                weights[j] += weights[i]
                merged = True
                break
        if not merged:
            keep.append(i)
    if len(keep) == m:
        return mu
    idx = np.array(keep, dtype=int)
    return AtomicMeasure(weights[idx], mu.points[idx])


def caratheodory_prune(model, mu: AtomicMeasure) -> AtomicMeasure:
    """Reduce the support to at most d+1 atoms without moving the image.

    While the support size m exceeds d+1, the stacked matrix with columns
    (psi(theta_i); 1) has a nontrivial null space; moving the weights along
    a null vector keeps both the forward image and the total mass fixed.
    The step length is the smallest positive ratio w_i / gamma_i, which
    zeroes at least one weight per pass, so the loop ends after at most
    m - (d+1) passes. Ties are broken toward the lowest atom index.

    Output support is always a subset of the input support.
    """
    d = model.d
    m = len(mu)
    if m <= d + 1:
        return mu
    weights = mu.weights.copy()
    psi_cols = model.psi_matrix(mu.points)  # (d, m), reused across passes
    active = np.arange(m)

    while active.size > d + 1:
        stacked = np.vstack([psi_cols[:, active], np.ones((1, active.size))])
        # Rank-revealing factorization; the last right singular vector spans
        # the (numerically) smallest direction, exact null space here.
        _, _, vt = np.linalg.svd(stacked)
        gamma = vt[-1]
        peak = int(np.argmax(np.abs(gamma)))
        if abs(gamma[peak]) < 1e-14:
            raise CaratheodoryError("degenerate null-space direction")
        if gamma[peak] < 0:
            gamma = -gamma
        pos = gamma > 1e-14
        if not np.any(pos):
            raise CaratheodoryError("null-space direction has no positive entry")
        ratios = np.full(active.size, np.inf)
        ratios[pos] = weights[active[pos]] / gamma[pos]
        hit = int(np.argmin(ratios))  # argmin takes the lowest index on ties
        step = ratios[hit]
        weights[active] = weights[active] - step * gamma
        weights[active[hit]] = 0.0
        np.clip(weights, 0.0, None, out=weights)
        active = active[weights[active] > 0.0]

    keep = weights > 0.0
    return AtomicMeasure(weights[keep], mu.points[keep])
