"""Generic M-estimation over a compact box.

An M-estimator is a minimizer of a random criterion over a compact
parameter set.  This module provides the box type, the multi-start
projected-BFGS minimizer, the score-covariance / expected-Hessian pair,
the standardized statistic built from them, and the fourth-moment
plug-in bound for sums of independent vectors.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import BadStart, InvalidArgument, NotInvertible, StalledStart
from .linalg import check_symmetric, lambda_min, sym_inv_sqrt


@dataclass(frozen=True)
class ParamBox:
    """Compact hyper-rectangle parameter space with an interior margin."""

    lower: np.ndarray
    upper: np.ndarray
    interior_margin: float = 0.0

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise InvalidArgument("box bounds must be 1-D vectors of equal length")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise InvalidArgument("box bounds must be finite")
        if not np.all(lower < upper):
            raise InvalidArgument("box requires lower < upper componentwise")
        if self.interior_margin < 0:
            raise InvalidArgument("interior_margin must be >= 0")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self):
        return self.lower.size

    def project(self, theta):
        return np.clip(np.asarray(theta, dtype=float), self.lower, self.upper)

    def contains(self, theta, atol=0.0):
        theta = np.asarray(theta, dtype=float)
        return bool(np.all(theta >= self.lower - atol) and np.all(theta <= self.upper + atol))

    def is_interior(self, theta, margin=1e-8):
        theta = np.asarray(theta, dtype=float)
        return bool(np.all(theta > self.lower + margin) and np.all(theta < self.upper - margin))

    def margin_ball_inside(self, theta0):
        """True when the interior-margin ball around theta0 fits strictly inside."""
        theta0 = np.asarray(theta0, dtype=float)
        m = self.interior_margin
        return bool(np.all(theta0 - m > self.lower) and np.all(theta0 + m < self.upper))


@dataclass(frozen=True)
class ObjectiveEval:
    """Value, gradient and Hessian of the criterion at one point."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    gradient_mode: str = "analytic"
    hessian_mode: str = "analytic"


@dataclass(frozen=True)
class SandwichPair:
    """Score covariance C and expected Hessian H at the target parameter."""

    c_bar: np.ndarray
    h_bar: np.ndarray
    lambda_min_c: float = field(default=None)
    lambda_min_h: float = field(default=None)

    def __post_init__(self):
        c = check_symmetric(self.c_bar, "c_bar")
        h = check_symmetric(self.h_bar, "h_bar")
        object.__setattr__(self, "c_bar", c)
        object.__setattr__(self, "h_bar", h)
        if self.lambda_min_c is None:
            object.__setattr__(self, "lambda_min_c", lambda_min(c))
        if self.lambda_min_h is None:
            object.__setattr__(self, "lambda_min_h", lambda_min(h))


@dataclass(frozen=True)
class EstimRun:
    """Outcome of one multi-start minimization."""

    theta_hat: np.ndarray
    objective_at_min: float
    n_starts: int
    converged: bool
    gradient_norm_at_min: float


@dataclass(frozen=True)
class MinimizeConfig:
    """Projected-BFGS settings (Armijo backtracking line search).

    ``stall_tol`` is the stationarity level still accepted as converged
    when the line search can no longer decrease the objective in double
    precision before ``grad_tol`` is reached.
    """

    grad_tol: float = 1e-9
    max_iter: int = 500
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    max_backtracks: int = 50
    stall_tol: float = 1e-7


def _projected_gradient_norm(x, g, box):
    """Norm of x - P(x - g); equals ||g|| at interior points."""
    return float(np.linalg.norm(x - box.project(x - g)))


def _bfgs_single_start(objective, box, x0, cfg, value_objective=None):
    """One projected-BFGS run.  Returns (f, x, converged, pgnorm) or None if stalled."""
    vf = value_objective if value_objective is not None else (lambda t: objective(t)[0])
    x = box.project(x0)
    f, g = objective(x)
    if not (np.isfinite(f) and np.all(np.isfinite(g))):
        return "bad"
    p = x.size
    h_inv = np.eye(p)
    first_update = True
    converged = False
    for _ in range(cfg.max_iter):
        pg = _projected_gradient_norm(x, g, box)
        if pg <= cfg.grad_tol * max(1.0, abs(f)):
            converged = True
            break
        d = -h_inv @ g
        steepest = False
        if d @ g >= -1e-14 * np.linalg.norm(d) * np.linalg.norm(g):
            # Curvature approximation lost descent; restart from steepest descent.
            d = -g
            h_inv = np.eye(p)
            steepest = True
        alpha = 1.0
        x_new = f_new = g_new = None
        for _ in range(cfg.max_backtracks):
            cand = box.project(x + alpha * d)
            step = cand - x
            if np.all(step == 0.0):
                alpha *= cfg.backtrack_factor
                continue
            f_c = vf(cand)
            if np.isfinite(f_c) and f_c <= f + cfg.armijo_c * (g @ step):
                f_full, g_c = objective(cand)
                x_new, f_new, g_new = cand, f_full, g_c
                break
            alpha *= cfg.backtrack_factor
        if x_new is None:
            if steepest:
                # Even steepest descent cannot decrease the objective.  If
                # the point is already stationary at the stall level, that
                # is convergence at achievable precision; otherwise the
                # start is abandoned.
                pg = _projected_gradient_norm(x, g, box)
                if pg <= cfg.stall_tol * max(1.0, abs(f)):
                    return f, x, True, pg
                return None
            # Drop the BFGS model and retry along the gradient.
            h_inv = np.eye(p)
            continue
        s = x_new - x
        y = g_new - g
        sy = s @ y
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            if first_update:
                # Scale the initial inverse-Hessian model to the observed
                # curvature before the first update (Nocedal-Wright 6.20).
                h_inv = (sy / (y @ y)) * np.eye(p)
                first_update = False
            rho = 1.0 / sy
            i_mat = np.eye(p)
            v = i_mat - rho * np.outer(s, y)
            h_inv = v @ h_inv @ v.T + rho * np.outer(s, s)
        x, f, g = x_new, f_new, g_new
    pg = _projected_gradient_norm(x, g, box)
    if pg <= cfg.grad_tol * max(1.0, abs(f)):
        converged = True
    elif pg <= cfg.stall_tol * max(1.0, abs(f)):
        # Iteration budget exhausted while grinding out sub-ulp decreases;
        # the point is stationary at the accepted stall level.
        converged = True
    return f, x, converged, pg


def minimize(objective, box, starts, config=None, value_objective=None):
    """Multi-start projected BFGS over a box.

    ``objective`` maps a parameter vector to ``(value, gradient)``.  When
    the gradient is expensive, ``value_objective`` may supply a cheaper
    value-only evaluation (consistent with ``objective``) that line
    searches use for rejected candidates.  Every start is refined
    independently; the lowest final objective wins, ties within 1e-12
    broken by lowest start index, so the result is deterministic given
    identical inputs.

    Raises BadStart if the objective is non-finite at a start, and
    StalledStart only when every start exhausts its line search.
    """
    cfg = config or MinimizeConfig()
    if len(starts) == 0:
        raise InvalidArgument("at least one start is required")
    results = []
    for idx, x0 in enumerate(starts):
        x0 = np.asarray(x0, dtype=float)
        if not box.contains(x0, atol=1e-12):
            raise InvalidArgument(f"start {idx} lies outside the box")
        out = _bfgs_single_start(objective, box, x0, cfg, value_objective)
        if out == "bad":
            raise BadStart(idx)
        if out is not None:
            results.append((idx, out))
    if not results:
        raise StalledStart("line search failed to decrease at every start")
    best_idx, best = results[0]
    for idx, out in results[1:]:
        if out[0] < best[0] - 1e-12:
            best_idx, best = idx, out
    f, x, converged, pg = best
    return EstimRun(
        theta_hat=x,
        objective_at_min=float(f),
        n_starts=len(starts),
        converged=bool(converged),
        gradient_norm_at_min=float(pg),
    )


def normalize_statistic(theta_hat, theta0, n, sandwich):
    """Standardized estimation error C^{-1/2} H sqrt(n) (theta_hat - theta0)."""
    if sandwich.lambda_min_c <= 1e-10:
        raise NotInvertible(
            f"score covariance is degenerate: lambda_min = {sandwich.lambda_min_c:.3e}"
        )
    d = np.asarray(theta_hat, dtype=float) - np.asarray(theta0, dtype=float)
    return sym_inv_sqrt(sandwich.c_bar) @ (sandwich.h_bar @ (np.sqrt(n) * d))


def sandwich_covariance(sandwich):
    """Asymptotic covariance H^{-1} C H^{-1} of sqrt(n) (theta_hat - theta0)."""
    h = sandwich.h_bar
    scale = float(np.max(np.abs(np.linalg.eigvalsh(h))))
    if sandwich.lambda_min_h <= 1e-12 * max(scale, 1e-300):
        raise NotInvertible(
            f"expected Hessian is singular: lambda_min = {sandwich.lambda_min_h:.3e}"
        )
    inner = np.linalg.solve(h, sandwich.c_bar)
    cov = np.linalg.solve(h, inner.T).T
    return 0.5 * (cov + cov.T)


def bonis_bound(beta, p, n, c0):
    """Fourth-moment W1 bound c0 (beta^{3/2} + p beta) / sqrt(n).

    Applies to normalized sums of n independent centered vectors in R^p
    whose fourth moments are bounded by beta.
    """
    if beta <= 0 or n < 1 or c0 <= 0 or p < 1:
        raise InvalidArgument("bonis_bound requires beta > 0, n >= 1, c0 > 0, p >= 1")
    return c0 * (beta ** 1.5 + p * beta) / np.sqrt(n)
