"""Hot-loop kernels, compiled when available.

The LTI recursions (trajectory simulation, sensitivity Jacobian, and the
batched adjoint scores used by the LMO grid) are the only sequential inner
loops in the package; everything else reduces to BLAS or sparse matvecs.
At import we pick the Cython extension if it was built, otherwise the
numpy fallback with identical semantics. ``benchmarks/bench_kernels.py``
compares the two.
"""

import numpy as np

try:
    from . import _ltikern as _impl

    HAVE_COMPILED_KERNELS = True
except ImportError:  # extension not built; pure-Python install
    from . import _ltikern_np as _impl

    HAVE_COMPILED_KERNELS = False

__all__ = [
    "HAVE_COMPILED_KERNELS",
    "backend_name",
    "lti_simulate",
    "lti_jacobian",
    "lti_grid_scores",
]


def backend_name() -> str:
    return "compiled" if HAVE_COMPILED_KERNELS else "numpy"


def _vec(x):
    return np.ascontiguousarray(x, dtype=np.float64).reshape(-1)


def lti_simulate(theta, u) -> np.ndarray:
    """Length-T output of the two-state system encoded by theta.

    theta = (x0_1, x0_2, r, alpha, B_1, B_2); the state map is
    x_{t+1} = A x_t + B u_t with A the rotation by alpha scaled by r, and
    y_t = x_t[0] for t = 1..T (u_0 is the first input sample).
    """
    theta = _vec(theta)
    if theta.size != 6:
        raise ValueError("theta must have 6 entries")
    return _impl.lti_simulate(theta, _vec(u))


def lti_jacobian(theta, u):
    """(y, J) with J the (T, 6) sensitivity of the output in theta."""
    theta = _vec(theta)
    if theta.size != 6:
        raise ValueError("theta must have 6 entries")
    return _impl.lti_jacobian(theta, _vec(u))


def lti_grid_scores(r_vals, alpha_vals, u, v) -> np.ndarray:
    """Adjoint scores G(r, alpha)^T v on a (r, alpha) grid; shape (nr, na, 4)."""
    u = _vec(u)
    v = _vec(v)
    if u.size != v.size:
        raise ValueError("u and v must have equal length")
    return _impl.lti_grid_scores(_vec(r_vals), _vec(alpha_vals), u, v)
