"""Outer loops: conditional gradient over measures and its variants.

Three variants share one loop body and differ only in how they improve the
iterate after a new atom is selected:

* ``cgm-m``  — fully corrective: re-solve the weights, prune, done.
* ``adcg``   — block coordinate descent alternating weight solves with
  local gradient moves of the atom parameters, repeated until the
  objective stalls.
* ``gf``     — weight solve, prune, then exactly one gradient pass over
  the atom parameters.

Atom selection is delegated to the model's linear minimization oracle
(LMO), and every iteration carries a duality-gap certificate that upper
bounds the suboptimality of the current measure whenever the LMO is exact.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .fcstep import WeightProblem, solve_weights
from .loss import Loss, SquaredLoss
from .measure import (
    AtomicMeasure,
    _observation_vector,
    caratheodory_prune,
    CaratheodoryError,
    merge_close_atoms,
)

__all__ = [
    "ForwardModel",
    "SolverConfig",
    "SolveResult",
    "frank_wolfe_gap",
    "local_descent",
    "estimate_curvature",
    "run",
    "CGM_M",
    "ADCG",
    "GF",
]

CGM_M = "cgm-m"
ADCG = "adcg"
GF = "gf"
_VARIANTS = (CGM_M, ADCG, GF)

# Relative objective decrease below which the ADCG inner loop stops.
INNER_LOOP_RTOL = 1e-6
# Atoms closer than this (box-normalized) are merged before weight solves.
MERGE_TOL = 1e-12


class ForwardModel:
    """Contract every measurement model implements.

    Attributes
    ----------
    d : output dimension (length of psi(theta)).
    p : parameter dimension.
    box : (p, 2) array of closed coordinate intervals, or None for models
        whose parameter space is not a box (such models must override
        ``local_descent_step``).
    lmo_exact : whether ``lmo`` solves the linear minimization exactly;
        controls termination on a negative gap.
    """

    d: int
    p: int
    box = None
    lmo_exact = False

    def psi(self, theta) -> np.ndarray:
        """Measurement of a unit-weight source at theta; shape (d,)."""
        raise NotImplementedError

    def jacobian(self, theta) -> np.ndarray:
        """d psi / d theta at theta; shape (d, p)."""
        raise NotImplementedError

    def lmo(self, v) -> np.ndarray:
        """Approximate argmin over the parameter space of <psi(theta), v>."""
        raise NotImplementedError

    def psi_matrix(self, points) -> np.ndarray:
        """Columns psi(theta_i) for the rows of ``points``; shape (d, m)."""
        points = np.asarray(points, dtype=float)
        if points.shape[0] == 0:
            return np.zeros((self.d, 0))
        return np.column_stack([self.psi(th) for th in points])


@dataclass
class SolverConfig:
    variant: str = ADCG
    tau: float = 1.0
    max_outer_iters: int = 50
    gap_tolerance: float = 1e-6
    max_inner_passes: int = 50
    local_descent_steps: int = 10
    stagewise_threshold: float | None = None

    def __post_init__(self):
        self.variant = str(self.variant).lower().replace("_", "-")
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {_VARIANTS}")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.max_outer_iters < 1 or self.max_inner_passes < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.gap_tolerance < 0:
            raise ValueError("gap_tolerance must be nonnegative")
        if self.stagewise_threshold is not None and self.stagewise_threshold < 0:
            raise ValueError("stagewise_threshold must be nonnegative")


@dataclass
class SolveResult:
    measure: AtomicMeasure
    objective_trace: list[float]
    gap_trace: list[float]
    support_trace: list[int]
    lower_bound: float
    termination: str  # "gap_met" | "max_iters" | "stagewise_stop"
    weight_solves_converged: bool = True

    @property
    def objective(self) -> float:
        return self.objective_trace[-1] if self.objective_trace else np.inf

    def to_json_dict(self) -> dict:
        return {
            "measure": self.measure.to_json_dict(),
            "objective_trace": [float(v) for v in self.objective_trace],
            "gap_trace": [float(v) for v in self.gap_trace],
            "support_trace": [int(v) for v in self.support_trace],
            "lower_bound": float(self.lower_bound),
            "termination": self.termination,
            "weight_solves_converged": bool(self.weight_solves_converged),
        }


def frank_wolfe_gap(model, mu: AtomicMeasure, g, theta_new, tau: float) -> float:
    """Duality-gap certificate <Phi mu, g> - tau * min(0, <psi(theta_new), g>).

    ``g`` must be the loss gradient at the residual of ``mu`` and
    ``theta_new`` the LMO output for that gradient. The zero measure is
    always feasible, hence the min with 0; with an exact LMO the value is
    nonnegative and upper bounds f(mu) - f_star by convexity.
    """
    from .measure import apply_forward

    g = np.asarray(g, dtype=float).reshape(-1)
    phi_mu = apply_forward(model, mu)
    lin = float(model.psi(np.asarray(theta_new, dtype=float)) @ g)
    return float(phi_mu @ g) - tau * min(0.0, lin)


def _objective(model, points, weights, y, loss):
    if len(weights) == 0:
        return loss.value(-y)
    return loss.value(model.psi_matrix(points) @ weights - y)


def _gauss_newton_norm(jacs, weights, n_iters=8):
    """Power-iteration estimate of the Gauss-Newton Hessian norm."""
    cols = np.hstack([w * J for w, J in zip(weights, jacs)])  # (d, m*p)
    v = np.ones(cols.shape[1]) / np.sqrt(cols.shape[1])
    est = 0.0
    for _ in range(n_iters):
        v = cols.T @ (cols @ v)
        nrm = np.linalg.norm(v)
        if nrm <= 0:
            return 0.0
        v /= nrm
        est = nrm
    return est


def _box_local_descent(model, points, weights, y, loss, steps):
    """Projected gradient with Armijo backtracking on the atom positions.

    All atom coordinates move jointly; weights stay fixed. Coordinates at
    an active box bound stay clamped whenever the descent direction points
    outward. Never increases the objective.
    """
    lo = model.box[:, 0]
    hi = model.box[:, 1]
    pts = np.asarray(points, dtype=float).copy()
    w = np.asarray(weights, dtype=float)
    psi_cols = model.psi_matrix(pts)
    r = psi_cols @ w - y
    fval = loss.value(r)

    jacs = [model.jacobian(th) for th in pts]
    hess_norm = _gauss_newton_norm(jacs, w)
    alpha = 1.0 / hess_norm if hess_norm > 0 else 1.0

    for _ in range(steps):
        g_loss = loss.gradient(r)
        grad = np.stack([wi * (J.T @ g_loss) for wi, J in zip(w, jacs)])
        if not np.any(grad):
            break
        moved = False
        for _ in range(40):  # Armijo backtracking, shrink 0.5
            cand = np.clip(pts - alpha * grad, lo, hi)
            diff = cand - pts
            if not np.any(diff):
                break
            cand_cols = model.psi_matrix(cand)
            r_cand = cand_cols @ w - y
            f_cand = loss.value(r_cand)
            if f_cand <= fval + 1e-4 * float(np.sum(grad * diff)):
                pts, r, fval = cand, r_cand, f_cand
                jacs = [model.jacobian(th) for th in pts]
                alpha *= 2.0
                moved = True
                break
            alpha *= 0.5
        if not moved:
            break
    return pts


def local_descent(model, support, weights, y, loss, steps: int):
    """Improve atom positions at fixed weights; never increases the objective.

    Models with a non-box parameter space supply their own single-step
    routine ``local_descent_step``; otherwise the generic box-projected
    gradient method runs. Zero steps (or all-zero weights) return the
    input unchanged.
    """
    support = np.asarray(support, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if steps <= 0 or support.shape[0] == 0 or not np.any(weights):
        return support
    custom = getattr(model, "local_descent_step", None)
    if custom is not None:
        pts = support
        for _ in range(steps):
            pts, improved = custom(pts, weights, y, loss)
            if not improved:
                break
        return pts
    if model.box is None:
        raise ValueError("model without a box must provide local_descent_step")
    return _box_local_descent(model, support, weights, y, loss, steps)


def estimate_curvature(model, tau: float, n_samples: int = 200, rng=None) -> float:
    """Sampled curvature upper bound for the squared loss.

    For f(x) = 0.5 ||x - y||^2 the curvature constant on the feasible set
    tau * conv(psi(Theta) u {0}) equals the squared diameter of that set.
    The diameter is estimated as the maximum pairwise distance over
    sampled atom images together with the origin.
    """
    rng = np.random.default_rng(rng)
    lo = model.box[:, 0]
    hi = model.box[:, 1]
    thetas = rng.uniform(lo, hi, size=(n_samples, model.p))
    imgs = model.psi_matrix(thetas).T  # (n, d)
    pts = np.vstack([imgs, np.zeros((1, model.d))])
    sq = np.sum(pts * pts, axis=1)
    dist2 = sq[:, None] + sq[None, :] - 2.0 * (pts @ pts.T)
    return tau * tau * float(np.max(dist2))


def _merge_or_append(points, weights, theta, box):
    """Add theta with weight zero unless it coincides with an existing atom."""
    if points.shape[0]:
        pts = points
        th = theta
        if box is not None:
            lo = box[:, 0]
            span = np.where(box[:, 1] - lo > 0, box[:, 1] - lo, 1.0)
            pts = (pts - lo) / span
            th = (theta - lo) / span
        if np.min(np.max(np.abs(pts - th), axis=1)) < MERGE_TOL:
            return points, weights
    return np.vstack([points, theta[None, :]]), np.append(weights, 0.0)


def run(model, obs, loss: Loss | None = None, config: SolverConfig | None = None,
        *, iteration_callback=None) -> SolveResult:
    """Run one solve; see the module docstring for the variant semantics.

    Per outer iteration: evaluate the loss gradient at the current
    residual, ask the LMO for the best new atom, record the gap
    certificate (terminating once it drops below ``gap_tolerance``),
    insert the atom with weight zero, then run the variant's improvement
    block. If the support afterwards exceeds d+1 atoms it is reduced by
    the null-space pruning step, which changes neither the image nor the
    mass. In stagewise mode the loop also stops when an outer iteration
    improves the objective by less than ``stagewise_threshold``.

    ``iteration_callback(k, measure, objective, gap)`` is invoked after
    every outer iteration; useful for per-iteration evaluation metrics.
    Weight-solver non-convergence is reported through the result flag, not
    as an error.
    """
    loss = loss if loss is not None else SquaredLoss()
    config = config if config is not None else SolverConfig()
    y = _observation_vector(obs)
    if y.size != model.d:
        raise ValueError(f"observation length {y.size} != model output dimension {model.d}")

    tau = float(config.tau)
    zero_tol = 1e-7 * tau  # weight-solve accuracy scales with the mass budget
    points = np.zeros((0, model.p))
    weights = np.zeros(0)

    objective_trace: list[float] = []
    gap_trace: list[float] = []
    support_trace: list[int] = []
    lower_bound = -np.inf
    termination = "max_iters"
    all_converged = True
    f_prev = None
    prev_state = None  # (points, weights) backing the last recorded objective

    if config.variant == CGM_M:
        n_passes, ld_steps = 1, 0
    elif config.variant == GF:
        n_passes, ld_steps = 1, 1
    else:
        n_passes, ld_steps = config.max_inner_passes, config.local_descent_steps

    for k in range(1, config.max_outer_iters + 1):
        psi_cols = model.psi_matrix(points)
        phi_mu = psi_cols @ weights if weights.size else np.zeros(model.d)
        r = phi_mu - y
        f_cur = loss.value(r)
        g = loss.gradient(r)

        theta_new = np.asarray(model.lmo(g), dtype=float).reshape(-1)
        lin = float(model.psi(theta_new) @ g)
        gap = float(phi_mu @ g) - tau * min(0.0, lin)
        gap_trace.append(gap)
        lower_bound = max(lower_bound, f_cur - max(gap, 0.0))

        if gap < config.gap_tolerance and (gap >= 0.0 or model.lmo_exact):
            # A negative gap can only certify optimality if the LMO is exact.
            objective_trace.append(f_cur)
            support_trace.append(weights.size)
            termination = "gap_met"
            if iteration_callback is not None:
                iteration_callback(k, AtomicMeasure(weights, points), f_cur, gap)
            break

        if lin < 0.0:
            points, weights = _merge_or_append(points, weights, theta_new, model.box)

        f_pass = None
        for _ in range(n_passes):
            if weights.size == 0:
                break
            merged = merge_close_atoms(AtomicMeasure(weights, points), model.box, MERGE_TOL)
            points, weights = merged.points, merged.weights
            prob = WeightProblem(model.psi_matrix(points), y, tau, loss)
            sol = solve_weights(prob, w0=weights)
            if not sol.converged:
                all_converged = False
            weights = sol.weights
            keep = weights > zero_tol
            points, weights = points[keep], weights[keep]
            if ld_steps > 0 and weights.size:
                points = local_descent(model, points, weights, y, loss, ld_steps)
            f_new = _objective(model, points, weights, y, loss)
            if f_pass is not None and f_pass - f_new < INNER_LOOP_RTOL * max(1e-30, abs(f_pass)):
                f_pass = f_new
                break
            f_pass = f_new

        if weights.size > model.d + 1:
            try:
                pruned = caratheodory_prune(model, AtomicMeasure(weights, points))
                points, weights = pruned.points, pruned.weights
            except CaratheodoryError as exc:
                warnings.warn(f"support pruning skipped: {exc}")

        f_out = _objective(model, points, weights, y, loss)
        if f_prev is not None and f_out > f_prev:
            # Monotone safeguard: any feasible update is admissible only if
            # it does not increase the objective (the sub-tolerance weight
            # prune can cost a few ulps near convergence), so fall back to
            # the previous iterate.
            points, weights = prev_state
            f_out = f_prev
        objective_trace.append(f_out)
        support_trace.append(weights.size)
        if iteration_callback is not None:
            iteration_callback(k, AtomicMeasure(weights, points), f_out, gap)

        if (
            config.stagewise_threshold is not None
            and f_prev is not None
            and f_prev - f_out < config.stagewise_threshold
        ):
            # The last source addition did not pay for itself: reject it and
            # report the measure (and trace) from before this iteration.
            points, weights = prev_state
            objective_trace.pop()
            gap_trace.pop()
            support_trace.pop()
            termination = "stagewise_stop"
            break
        f_prev = f_out
        prev_state = (points, weights)

    return SolveResult(
        measure=AtomicMeasure(weights, points),
        objective_trace=objective_trace,
        gap_trace=gap_trace,
        support_trace=support_trace,
        lower_bound=float(lower_bound),
        termination=termination,
        weight_solves_converged=all_converged,
    )
