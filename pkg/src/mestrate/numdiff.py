"""Central finite-difference helpers.

Used for the cross-validation Hessian (no closed form is implemented for
it) and as independent oracles against the analytic gradients in tests.
"""

import numpy as np

from .errors import StepOutOfDomain


def central_gradient(f, theta, h=1e-6):
    """Central-difference gradient of a scalar function, step h per coordinate."""
    theta = np.asarray(theta, dtype=float)
    g = np.zeros_like(theta)
    for k in range(theta.size):
        e = np.zeros_like(theta)
        e[k] = h
        g[k] = (f(theta + e) - f(theta - e)) / (2.0 * h)
    return g


def central_jacobian(grad_fn, theta, steps):
    """Central-difference Jacobian of a vector-valued function.

    ``steps[k]`` is the step used along coordinate k.  Returns the matrix
    J[j, k] = d grad_fn(theta)_j / d theta_k.
    """
    theta = np.asarray(theta, dtype=float)
    p = theta.size
    cols = []
    for k in range(p):
        e = np.zeros(p)
        e[k] = steps[k]
        cols.append((grad_fn(theta + e) - grad_fn(theta - e)) / (2.0 * steps[k]))
    return np.column_stack(cols)


def hessian_from_gradient(grad_fn, theta, lower=None, upper=None, h_scale=1e-5):
    """Symmetrized central-difference Hessian from an analytic gradient.

    Step along coordinate k is ``h_scale * max(1, |theta_k|)``.  When box
    bounds are given, the full stencil must stay inside them, otherwise
    StepOutOfDomain is raised.  Returns ``(hessian, asymmetry)`` where
    asymmetry is the relative size of the skew part of the raw Jacobian
    before symmetrization (a consistency diagnostic on the gradient).
    """
    theta = np.asarray(theta, dtype=float)
    steps = h_scale * np.maximum(1.0, np.abs(theta))
    if lower is not None and np.any(theta - steps < np.asarray(lower, dtype=float)):
        raise StepOutOfDomain("finite-difference stencil leaves the box (lower bound)")
    if upper is not None and np.any(theta + steps > np.asarray(upper, dtype=float)):
        raise StepOutOfDomain("finite-difference stencil leaves the box (upper bound)")
    jac = central_jacobian(grad_fn, theta, steps)
    sym = 0.5 * (jac + jac.T)
    scale = max(float(np.max(np.abs(sym))), 1e-300)
    asym = float(np.max(np.abs(jac - jac.T))) / scale
    return sym, asym
