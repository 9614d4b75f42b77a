"""Logistic regression with deterministic covariates.

Data generation under a known true parameter, the negative normalized
log-likelihood with analytic gradient and Hessian, and the score
covariance / expected Hessian pair at the truth.  The model is
well-specified, so the two sandwich matrices coincide (information
equality) and neither depends on the observed outcomes.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import InvalidArgument
from .mestim import ObjectiveEval, SandwichPair
from .rng import TAG_DESIGN, TAG_OUTCOME, stream


@dataclass(frozen=True)
class LogisticDesign:
    """Frozen n x p covariate matrix with the true parameter."""

    x: np.ndarray
    theta0: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        theta0 = np.asarray(self.theta0, dtype=float)
        if x.ndim != 2:
            raise InvalidArgument("design matrix must be 2-D")
        if theta0.shape != (x.shape[1],):
            raise InvalidArgument("theta0 length must match the design columns")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(theta0))):
            raise InvalidArgument("design contains NaN or Inf")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "theta0", theta0)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def p(self):
        return self.x.shape[1]

    @property
    def c_x1(self):
        """Largest covariate row norm (the uniform bound on ||x_i||)."""
        return float(np.max(np.linalg.norm(self.x, axis=1))) if self.n else 0.0

    def second_moment_lambda_min(self):
        """Smallest eigenvalue of (1/n) sum x_i x_i^T."""
        return float(np.linalg.eigvalsh(self.x.T @ self.x / self.n)[0])


@dataclass(frozen=True)
class LogisticData:
    design: LogisticDesign
    y: np.ndarray
    seed: tuple

    def __post_init__(self):
        y = np.asarray(self.y)
        if y.shape != (self.design.n,):
            raise InvalidArgument("outcome length must match the design rows")
        if not np.all((y == 0) | (y == 1)):
            raise InvalidArgument("outcomes must be 0/1")
        object.__setattr__(self, "y", y.astype(float))


def make_uniform_design(n, p, theta0, seed, low=-1.0, high=1.0,
                        lambda_min_required=0.05, max_redraws=20):
    """Draw a design with rows uniform on [low, high]^p and freeze it.

    The draw is rejected and redrawn (fresh sub-stream) until the smallest
    eigenvalue of the empirical second-moment matrix reaches the required
    level, so downstream identifiability diagnostics hold by construction.
    """
    key = seed if isinstance(seed, tuple) else (int(seed),)
    for attempt in range(max_redraws):
        rows = stream(*key, TAG_DESIGN, n, attempt).uniform(low, high, size=(n, p))
        design = LogisticDesign(x=rows, theta0=np.asarray(theta0, dtype=float))
        if design.second_moment_lambda_min() >= lambda_min_required:
            return design
    raise InvalidArgument(
        f"could not draw a design with lambda_min >= {lambda_min_required} "
        f"in {max_redraws} attempts"
    )


def success_prob(x_i, theta):
    """P(y_i = 1) = sigmoid(x_i . theta), overflow-safe for any argument."""
    t = float(np.dot(np.asarray(x_i, dtype=float), np.asarray(theta, dtype=float)))
    return float(expit(t))


def sample_outcomes(design, seed):
    """Independent Bernoulli outcomes under the design's true parameter.

    Outcome i is a pure function of (seed, i): the draws come from one
    counter-based stream, so the result does not depend on evaluation
    order and replications can be generated in parallel.
    """
    key = seed if isinstance(seed, tuple) else (int(seed),)
    probs = expit(design.x @ design.theta0)
    u = stream(*key, TAG_OUTCOME).random(design.n)
    return LogisticData(design=design, y=(u < probs).astype(float), seed=key)


def value_and_grad(data):
    """Objective closure for the minimizer: theta -> (M_n, grad M_n)."""
    x, y = data.design.x, data.y
    n = data.design.n

    def fg(theta):
        t = x @ theta
        # log(1 + e^t) without overflow; equals logaddexp(0, t).
        value = float(np.mean(np.logaddexp(0.0, t) - y * t))
        grad = x.T @ (expit(t) - y) / n
        return value, grad

    return fg


def objective(data, theta):
    """Full evaluation of the negative normalized log-likelihood.

    value   = (1/n) sum(-y_i x_i.theta + log(1 + e^{x_i.theta}))
    grad    = (1/n) sum((p_i - y_i) x_i)
    hessian = (1/n) sum(p_i (1 - p_i) x_i x_i^T)   (PSD: the objective is convex)
    """
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise InvalidArgument("theta contains NaN or Inf")
    x, y = data.design.x, data.y
    n = data.design.n
    t = x @ theta
    probs = expit(t)
    value = float(np.mean(np.logaddexp(0.0, t) - y * t))
    grad = x.T @ (probs - y) / n
    w = probs * (1.0 - probs)
    hess = (x * w[:, None]).T @ x / n
    hess = 0.5 * (hess + hess.T)
    return ObjectiveEval(value=value, gradient=grad, hessian=hess,
                         gradient_mode="analytic", hessian_mode="analytic")


def sandwich_at_truth(design):
    """Score covariance and expected Hessian at the true parameter.

    Both equal (1/n) sum p_i (1 - p_i) x_i x_i^T with p_i evaluated at
    theta0: the model is well-specified, so Cov(sqrt(n) grad M_n(theta0))
    equals E(hess M_n(theta0)) exactly, and no outcomes are needed.
    """
    probs = expit(design.x @ design.theta0)
    w = probs * (1.0 - probs)
    h = (design.x * w[:, None]).T @ design.x / design.n
    h = 0.5 * (h + h.T)
    return SandwichPair(c_bar=h.copy(), h_bar=h)
