"""Gradient-descent monochromatization solver.

Recovers the reference-wavelength pattern x from a broadband measurement b
by minimizing eps = ||b - sum_i a_i A_i x||^2, starting from x_0 = b, with
optional momentum (v_{n+1} = (v_n - grad)(1 - f*dt), x_{n+1} = x_n + v*dt)
and a non-negativity projection of x after every iteration.
"""

from dataclasses import dataclass, field

import numpy as np

from .spectrum import apply_poly, apply_poly_adjoint


class DivergenceError(RuntimeError):
    """Solver iterate blew up; carries the iteration index and last residual."""

    def __init__(self, iteration, epsilon):
        super().__init__(f"solver diverged at iteration {iteration}, eps={epsilon:.3e}")
        self.iteration = iteration
        self.epsilon = epsilon


@dataclass
class SolverConfig:
    mode: str = "momentum"  # "plain" (x -= alpha*grad) or "momentum"
    alpha: float = 1.0  # step size, plain mode only
    dt: float = 1.0  # time step, momentum mode
    friction: float = 0.2  # friction f, momentum mode
    max_iter: int = 500
    residual_tol: float = 0.0  # stop when sqrt(eps)/||b|| <= tol; 0 = run max_iter
    projection: bool = True  # clamp x to >= 0 after each iteration
    precondition: bool = True  # rescale (weights, b) by the operator-norm bound

    def __post_init__(self):
        if self.mode not in ("plain", "momentum"):
            raise ValueError(f"unknown solver mode {self.mode!r}")
        if self.alpha <= 0 or self.dt <= 0:
            raise ValueError("alpha and dt must be positive")
        if not 0 <= self.friction * self.dt < 1:
            raise ValueError("need 0 <= f*dt < 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class SolverState:
    x: np.ndarray
    v: np.ndarray
    n: int = 0
    trace: list = field(default_factory=list)


def residual(x, b, spec):
    """Residual field and its squared 2-norm: (eps, delta_b)."""
    if x.shape != b.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {b.shape}")
    db = b - apply_poly(x, spec)
    return float(np.sum(db * db)), db


def gradient(db, spec):
    """Gradient of eps with respect to x: -2 * adjoint(delta_b)."""
    return -2.0 * apply_poly_adjoint(db, spec)


def project_nonneg(x):
    return np.maximum(x, 0.0)


def step_plain(state, grad, alpha, projection=True):
    state.x = state.x - alpha * grad
    if projection:
        state.x = project_nonneg(state.x)
    state.n += 1
    return state


def step_momentum(state, grad, dt, friction, projection=True):
    state.v = (state.v - grad) * (1.0 - friction * dt)
    state.x = state.x + state.v * dt
    if projection:
        state.x = project_nonneg(state.x)
    state.n += 1
    return state


def solve(b, spec, cfg, callback=None):
    """Run the configured iteration from x_0 = b; returns (x, trace).

    trace[n] is eps evaluated at iterate x_n (before the n-th update), so a
    run with max_iter=k performs k updates and records k residuals.

    With ``cfg.precondition`` the spectrum weights and b are both divided by
    sum(a_i * realized_ratio_i), an upper bound on the operator norm (each
    channel's largest singular value is its realized ratio). The minimizer
    is unchanged, but the normal-matrix spectrum lands in the stability
    region of the dt=1, f=0.2 momentum step for any spectrum flux.
    """
    b = np.asarray(b, dtype=np.float64)
    if spec.bound_shape != b.shape:
        spec = spec.bind(b.shape)
    if cfg.precondition:
        scale = sum(w * g.realized_ratio for g, w in spec.channels())
        if not np.isclose(scale, 1.0):
            spec = spec.scaled(1.0 / scale).bind(b.shape)
            b = b / scale

    b_norm = float(np.linalg.norm(b))
    state = SolverState(x=b.copy(), v=np.zeros_like(b))
    eps0 = None
    for _ in range(cfg.max_iter):
        eps, db = residual(state.x, b, spec)
        if not np.isfinite(eps):
            raise DivergenceError(state.n, eps)
        if eps0 is None:
            eps0 = eps
        elif eps > 1e6 * max(eps0, np.finfo(np.float64).tiny):
            raise DivergenceError(state.n, eps)
        state.trace.append(eps)
        if cfg.residual_tol > 0 and b_norm > 0 and np.sqrt(eps) / b_norm <= cfg.residual_tol:
            break
        grad = gradient(db, spec)
        if cfg.mode == "plain":
            step_plain(state, grad, cfg.alpha, cfg.projection)
        else:
            step_momentum(state, grad, cfg.dt, cfg.friction, cfg.projection)
        if callback is not None:
            callback(state.n, state.x, eps)
    if not np.all(np.isfinite(state.x)):
        raise DivergenceError(state.n, state.trace[-1] if state.trace else np.inf)
    return state.x, np.array(state.trace)


def trace_csv_rows(trace, b_norm):
    """Rows (iteration, epsilon, relative_residual) for CSV export."""
    rows = []
    for i, eps in enumerate(trace):
        rel = np.sqrt(eps) / b_norm if b_norm > 0 else np.inf
        rows.append((i, float(eps), float(rel)))
    return rows
