"""Covariance-parameter estimation for Gaussian processes by leave-one-out CV.

Observation points on a jittered increasing-domain grid, stationary
correlation families (exponential and powered-exponential), Cholesky
sampling of the field, the leave-one-out cross-validation criterion in
both its direct and matrix forms, its analytic gradient as a vector of
quadratic forms y' B_j y, sandwich matrices from exact Gaussian
quadratic-form trace identities, and the explicit Wasserstein bound for
vectors of centered Gaussian quadratic forms.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import lapack
from scipy.spatial.distance import cdist

from .errors import (
    DegenerateC,
    InvalidArgument,
    ModelInconsistency,
    NotCentered,
    NotPD,
    StepOutOfDomain,
)
from .linalg import check_symmetric
from .mestim import ParamBox, SandwichPair
from .numdiff import hessian_from_gradient
from .rng import TAG_DESIGN, TAG_FIELD, stream

# Expected-gradient-at-truth trace identity holds analytically; violations
# beyond this (scaled by n) indicate a kernel-derivative bug.
TRACE_CENTER_RTOL = 1e-8


@dataclass(frozen=True)
class PointSet:
    """Observation locations with their exact minimal pairwise separation."""

    points: np.ndarray
    min_pairwise_distance: float

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def d(self):
        return self.points.shape[1]

    @cached_property
    def distances(self):
        return cdist(self.points, self.points)


def build_points(n, d, spacing, jitter, seed):
    """Jittered regular grid: the first n nodes of a spacing-spaced grid in
    [0, spacing * ceil(n^(1/d))]^d, each offset uniformly per coordinate by
    at most jitter * spacing / sqrt(d) (so the offset magnitude never
    exceeds jitter * spacing and the minimal separation stays at least
    spacing * (1 - 2 * jitter)).
    """
    if not 0 <= jitter < 0.5:
        raise InvalidArgument(f"jitter must lie in [0, 0.5), got {jitter}")
    if n < 1 or d < 1 or spacing <= 0:
        raise InvalidArgument("need n >= 1, d >= 1, spacing > 0")
    m = int(np.ceil(n ** (1.0 / d)))
    while m**d < n:  # guard against floating-point roundoff in the root
        m += 1
    grid_axes = np.meshgrid(*[np.arange(m) for _ in range(d)], indexing="ij")
    nodes = np.column_stack([ax.ravel() for ax in grid_axes])[:n] * float(spacing)
    key = seed if isinstance(seed, tuple) else (int(seed),)
    half = jitter * spacing / np.sqrt(d)
    offsets = stream(*key, TAG_DESIGN).uniform(-half, half, size=(n, d))
    pts = nodes + offsets
    if n == 1:
        min_dist = np.inf
    else:
        dist = cdist(pts, pts)
        min_dist = float(np.min(dist[np.triu_indices(n, k=1)]))
    return PointSet(points=pts, min_pairwise_distance=min_dist)


@dataclass(frozen=True)
class KernelFamily:
    """Stationary isotropic correlation family with unit value at zero lag.

    ``exponential``: k(r) = exp(-theta1 r), one parameter.
    ``powered-exponential``: k(r) = exp(-theta1 r^theta2), two parameters,
    power restricted to [0.5, 1.5].
    """

    name: str
    d: int

    def __post_init__(self):
        if self.name not in ("exponential", "powered-exponential"):
            raise InvalidArgument(f"unknown kernel family {self.name!r}")

    @property
    def n_params(self):
        return 1 if self.name == "exponential" else 2

    def validate(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise InvalidArgument(
                f"{self.name} kernel expects {self.n_params} parameters"
            )
        if not np.all(np.isfinite(theta)) or theta[0] <= 0:
            raise InvalidArgument("kernel rate must be positive and finite")
        if self.n_params == 2 and not 0.5 <= theta[1] <= 1.5:
            raise InvalidArgument("kernel power must lie in [0.5, 1.5]")
        return theta

    def default_box(self, rate_bounds=(0.2, 5.0), power_bounds=(0.5, 1.5),
                    interior_margin=0.1):
        if self.n_params == 1:
            return ParamBox(np.array([rate_bounds[0]]), np.array([rate_bounds[1]]),
                            interior_margin)
        return ParamBox(np.array([rate_bounds[0], power_bounds[0]]),
                        np.array([rate_bounds[1], power_bounds[1]]),
                        interior_margin)

    def corr(self, theta, dists):
        """Correlation values at the given distances (array of any shape)."""
        theta = self.validate(theta)
        r = np.asarray(dists, dtype=float)
        if self.n_params == 1:
            return np.exp(-theta[0] * r)
        return np.exp(-theta[0] * np.power(r, theta[1]))

    def dcorr(self, theta, dists, k=None):
        """Derivatives of the correlation with respect to each parameter.

        ``k`` may pass precomputed correlation values at the same theta and
        distances to avoid re-exponentiating.
        """
        theta = self.validate(theta)
        r = np.asarray(dists, dtype=float)
        if self.n_params == 1:
            if k is None:
                k = np.exp(-theta[0] * r)
            return [-r * k]
        pos = r > 0
        rpow = np.where(pos, np.power(r, theta[1], where=pos, out=np.zeros_like(r)), 0.0)
        if k is None:
            k = np.exp(-theta[0] * rpow)
        d_rate = -rpow * k
        logr = np.where(pos, np.log(r, where=pos, out=np.zeros_like(r)), 0.0)
        d_power = -theta[0] * rpow * logr * k
        return [d_rate, d_power]


def kernel_eval(family, theta, lag):
    """Correlation and its parameter gradient at a single lag vector."""
    lag = np.atleast_1d(np.asarray(lag, dtype=float))
    r = float(np.linalg.norm(lag))
    value = float(family.corr(theta, r))
    grad = np.array([float(dk) for dk in family.dcorr(theta, r)])
    return value, grad


def _chol_inverse(r_mat):
    """Lower Cholesky factor and full inverse of a symmetric PD matrix."""
    c, info = lapack.dpotrf(r_mat, lower=1)
    if info != 0:
        lam = float(np.linalg.eigvalsh(r_mat)[0])
        raise NotPD(f"correlation matrix not positive definite (lambda_min = {lam:.3e})")
    inv, info = lapack.dpotri(c, lower=1)
    if info != 0:
        raise NotPD("dpotri failed on the Cholesky factor")
    r_inv = np.tril(inv) + np.tril(inv, -1).T
    return np.tril(c), r_inv


@dataclass(frozen=True)
class CorrMatrices:
    """Correlation matrix bundle at one parameter value.

    ``d_inv`` holds the diagonal of diag(R^{-1})^{-1} as a vector, i.e.
    1 / (R^{-1})_(ii); ``dr`` the parameter derivatives of R.
    """

    r: np.ndarray
    r_inv: np.ndarray
    d_inv: np.ndarray
    dr: list
    lambda_min: float
    chol_lower: np.ndarray

    @property
    def n(self):
        return self.r.shape[0]

    @property
    def n_params(self):
        return len(self.dr)


def build_corr(family, theta, points):
    """Assemble R, R^{-1}, diag(R^{-1})^{-1} and dR/dtheta at one theta."""
    dists = points.distances
    r_mat = family.corr(theta, dists)
    np.fill_diagonal(r_mat, 1.0)
    chol, r_inv = _chol_inverse(r_mat)
    lam = float(np.linalg.eigvalsh(r_mat)[0])
    dr = family.dcorr(theta, dists)
    for m in dr:
        np.fill_diagonal(m, 0.0)
    return CorrMatrices(
        r=r_mat,
        r_inv=r_inv,
        d_inv=1.0 / np.diag(r_inv),
        dr=dr,
        lambda_min=lam,
        chol_lower=chol,
    )


def sample_field(corr, seed):
    """One centered Gaussian field draw with correlation matrix R.

    y = L z with L the lower Cholesky factor and z standard normal from a
    counter-based stream, so draws are reproducible and order-independent.
    """
    key = seed if isinstance(seed, tuple) else (int(seed),)
    z = stream(*key, TAG_FIELD).standard_normal(corr.n)
    return corr.chol_lower @ z


def cv_objective(corr, y):
    """Mean squared leave-one-out error in matrix form.

    (1/n) y' R^{-1} diag(R^{-1})^{-2} R^{-1} y, which equals the direct
    average of squared leave-one-out prediction errors.
    """
    y = np.asarray(y, dtype=float)
    a = corr.r_inv @ y
    return float(np.mean((corr.d_inv * a) ** 2))


def cv_objective_direct(corr, y):
    """Leave-one-out criterion by explicit (n-1) x (n-1) conditioning solves.

    Independent of the matrix identity; used to validate cv_objective.
    """
    y = np.asarray(y, dtype=float)
    n = corr.n
    if n == 1:
        return float(y[0] ** 2)
    total = 0.0
    for i in range(n):
        keep = np.arange(n) != i
        r_sub = corr.r[np.ix_(keep, keep)]
        w = np.linalg.solve(r_sub, y[keep])
        pred = corr.r[i, keep] @ w
        total += (y[i] - pred) ** 2
    return total / n


@dataclass(frozen=True)
class GradMatrices:
    """Quadratic-form matrices of the CV gradient: (grad M_n)_j = y' B_j y / n."""

    b: list
    b_sym: list
    rho1: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.rho1 is None:
            object.__setattr__(
                self, "rho1",
                np.array([np.linalg.norm(m, 2) for m in self.b]),
            )


def grad_matrices(corr):
    """Assemble the gradient matrices

    B_j = 2 R^{-1} D^{-2} (diag(R^{-1} dR_j R^{-1}) D^{-1} - R^{-1} dR_j) R^{-1}

    with D = diag(R^{-1}), plus their symmetrized versions (quadratic forms
    are invariant under symmetrization).
    """
    r_inv, d_inv = corr.r_inv, corr.d_inv
    left = r_inv * (d_inv**2)[None, :]  # R^{-1} D^{-2}
    bs = []
    for drj in corr.dr:
        w = r_inv @ drj
        g_diag = np.sum(w * r_inv, axis=1)  # diag(R^{-1} dR_j R^{-1})
        inner = np.diag(g_diag * d_inv) - w
        bs.append(2.0 * left @ inner @ r_inv)
    b_sym = [0.5 * (b + b.T) for b in bs]
    return GradMatrices(b=bs, b_sym=b_sym)


def cv_gradient(corr, y):
    """Analytic CV gradient and the matrices generating it."""
    y = np.asarray(y, dtype=float)
    mats = grad_matrices(corr)
    grad = np.array([y @ (b @ y) for b in mats.b]) / corr.n
    return grad, mats


class CvObjective:
    """Leave-one-out criterion for the minimizer: theta -> (M_n, grad M_n).

    The gradient is evaluated through the quadratic-form identity without
    assembling the B matrices (one matrix product per parameter instead of
    three).  ``value`` computes the criterion alone, skipping that product;
    the factorization at the most recent theta is cached, so a line-search
    value call followed by a full call at the accepted point does not
    refactorize.  Returns +inf when R(theta) is not numerically PD so line
    searches back off.
    """

    def __init__(self, family, points, y):
        self._family = family
        self._dists = points.distances
        self._y = np.asarray(y, dtype=float)
        self._n = points.n
        self._p = family.n_params
        self._key = None
        self._prep = None

    def _prepare(self, theta):
        key = theta.tobytes()
        if key == self._key:
            return self._prep
        r_mat = self._family.corr(theta, self._dists)
        np.fill_diagonal(r_mat, 1.0)
        try:
            _, r_inv = _chol_inverse(r_mat)
        except NotPD:
            prep = None
        else:
            a = r_inv @ self._y
            d_inv = 1.0 / np.diag(r_inv)
            value = float(np.mean((d_inv * a) ** 2))
            prep = (r_mat, r_inv, a, d_inv, value)
        self._key = key
        self._prep = prep
        return prep

    def value(self, theta):
        prep = self._prepare(np.asarray(theta, dtype=float))
        return np.inf if prep is None else prep[4]

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        prep = self._prepare(theta)
        if prep is None:
            return np.inf, np.zeros(self._p)
        r_mat, r_inv, a, d_inv, value = prep
        dr = self._family.dcorr(theta, self._dists, k=r_mat)
        grad = np.zeros(self._p)
        a_dinv2 = d_inv**2 * a
        for j in range(self._p):
            np.fill_diagonal(dr[j], 0.0)
            w = r_inv @ dr[j]
            g_diag = np.sum(w * r_inv, axis=1)
            term_diag = float(np.sum(a * a * d_inv**3 * g_diag))
            term_full = float(a_dinv2 @ (w @ a))
            grad[j] = 2.0 * (term_diag - term_full) / self._n
        return value, grad


def cv_value_and_grad(family, points, y):
    """Objective for the minimizer; see CvObjective."""
    return CvObjective(family, points, y)


def cv_hessian(family, theta, points, y, box=None, h_scale=1e-5):
    """CV Hessian by symmetrized central differences of the analytic gradient.

    The step along coordinate k is h_scale * max(1, |theta_k|); theta must
    sit at least two steps inside the box, otherwise StepOutOfDomain.
    """
    theta = np.asarray(theta, dtype=float)
    box = box or family.default_box()
    steps = h_scale * np.maximum(1.0, np.abs(theta))
    if np.any(theta - 2 * steps < box.lower) or np.any(theta + 2 * steps > box.upper):
        raise StepOutOfDomain("theta is within 2h of the box boundary")
    fg = cv_value_and_grad(family, points, np.asarray(y, dtype=float))
    hess, _asym = hessian_from_gradient(
        lambda th: fg(th)[1], theta, h_scale=h_scale
    )
    return hess


def _trace_product(a, b):
    return float(np.einsum("ij,ji->", a, b))


def cv_sandwich_at_truth(family, theta0, points):
    """Score covariance and expected Hessian of the CV criterion at theta0.

    The score components are centered Gaussian quadratic forms, so their
    covariance is exact:  C_jk = (2/n) Tr(R B~_j R B~_k)  with B~ the
    symmetrized gradient matrices at theta0 and R = R(theta0).  The
    expected Hessian is obtained by central differences of the expected
    gradient surface g_j(theta) = (1/n) Tr(R(theta0) B~(theta)_j), which is
    exact in the field (no sampling).  The expected gradient must vanish at
    theta0: |Tr(R B~_j)| <= 1e-8 n is asserted and a violation raises
    ModelInconsistency (it would indicate a kernel-derivative bug).
    """
    theta0 = np.asarray(theta0, dtype=float)
    corr0 = build_corr(family, theta0, points)
    mats0 = grad_matrices(corr0)
    n = points.n
    for j, b in enumerate(mats0.b_sym):
        center = abs(_trace_product(corr0.r, b))
        if center > TRACE_CENTER_RTOL * n:
            raise ModelInconsistency(
                f"expected gradient at truth is not zero: |Tr(R B_{j})| = {center:.3e}"
            )
    p = family.n_params
    rb = [corr0.r @ b for b in mats0.b_sym]
    c_bar = np.empty((p, p))
    for j in range(p):
        for k in range(j, p):
            c_bar[j, k] = c_bar[k, j] = 2.0 * _trace_product(rb[j], rb[k]) / n

    def expected_gradient(theta):
        corr = build_corr(family, theta, points)
        mats = grad_matrices(corr)
        return np.array([_trace_product(corr0.r, b) for b in mats.b_sym]) / n

    h_bar, _asym = hessian_from_gradient(expected_gradient, theta0, h_scale=1e-5)
    return SandwichPair(c_bar=c_bar, h_bar=h_bar)


def quadform_w1_bound(k_mat, a_list, convention="chaos"):
    """Wasserstein bound for a vector of centered Gaussian quadratic forms.

    For X = (Y'A_1 Y, ..., Y'A_p Y) with Y ~ N(0, K) and Tr(A_i K) = 0, the
    distance of X to N(0, C) is at most

        sqrt(lambda_1(C)) / lambda_p(C) * sqrt(2 sum_ij Tr((K A_i K A_j)^2)).

    Two conventions for C are supported: ``paper`` uses
    C_ij = Tr(K A_i K A_j); ``chaos`` uses 2 Tr(K A_i K A_j), the exact
    covariance of the quadratic-form vector.  Returns (bound, C).
    """
    if convention not in ("paper", "chaos"):
        raise InvalidArgument(f"convention must be 'paper' or 'chaos', got {convention!r}")
    k_mat = check_symmetric(k_mat, "K")
    n = k_mat.shape[0]
    a_syms = [check_symmetric(a, f"A_{i}") for i, a in enumerate(a_list)]
    if not a_syms:
        raise InvalidArgument("need at least one quadratic-form matrix")
    for i, a in enumerate(a_syms):
        center = abs(_trace_product(a, k_mat))
        if center > TRACE_CENTER_RTOL * n:
            raise NotCentered(f"|Tr(A_{i} K)| = {center:.3e} exceeds 1e-8 n")
    ka = [k_mat @ a for a in a_syms]
    p = len(ka)
    base = np.empty((p, p))
    trace_sum = 0.0
    for i in range(p):
        for j in range(p):
            m = ka[i] @ ka[j]
            base[i, j] = np.trace(m)
            trace_sum += _trace_product(m, m)
    base = 0.5 * (base + base.T)
    c = base if convention == "paper" else 2.0 * base
    eigs = np.linalg.eigvalsh(c)
    lam_min, lam_max = float(eigs[0]), float(eigs[-1])
    if lam_min <= 1e-12 * max(lam_max, 1e-300):
        raise DegenerateC(f"covariance of quadratic forms is singular (lambda_min = {lam_min:.3e})")
    bound = np.sqrt(lam_max) / lam_min * np.sqrt(2.0 * trace_sum)
    return float(bound), c
