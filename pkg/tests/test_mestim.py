import numpy as np
import pytest

from mestrate.errors import BadStart, InvalidArgument, NotInvertible, StalledStart
from mestrate.logistic import make_uniform_design, sample_outcomes, value_and_grad
from mestrate.mestim import (
    MinimizeConfig,
    ParamBox,
    SandwichPair,
    bonis_bound,
    minimize,
    normalize_statistic,
    sandwich_covariance,
)
from mestrate.wasserstein import w1_exact_pair


def quadratic(center):
    center = np.asarray(center, dtype=float)

    def fg(theta):
        d = theta - center
        return float(d @ d), 2.0 * d

    return fg


UNIT_BOX = ParamBox(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))


def test_param_box_validation():
    with pytest.raises(InvalidArgument):
        ParamBox(np.array([0.0, 0.0]), np.array([1.0, 0.0]))
    with pytest.raises(InvalidArgument):
        ParamBox(np.array([0.0]), np.array([np.inf]))
    box = ParamBox(np.array([0.0]), np.array([1.0]), interior_margin=0.2)
    assert box.margin_ball_inside(np.array([0.5]))
    assert not box.margin_ball_inside(np.array([0.1]))


def test_minimize_interior_quadratic():
    run = minimize(quadratic([0.3, 0.4]), UNIT_BOX, [np.zeros(2)])
    np.testing.assert_allclose(run.theta_hat, [0.3, 0.4], atol=1e-9)
    assert run.converged
    assert run.gradient_norm_at_min <= 1e-7 * max(1.0, abs(run.objective_at_min))


def test_minimize_projects_onto_box():
    run = minimize(quadratic([2.0, 0.0]), UNIT_BOX, [np.zeros(2)])
    np.testing.assert_allclose(run.theta_hat, [1.0, 0.0], atol=1e-9)
    assert run.converged


def test_minimize_deterministic():
    starts = [np.array([-0.5, 0.9]), np.array([0.2, -0.7])]
    a = minimize(quadratic([0.1, -0.2]), UNIT_BOX, starts)
    b = minimize(quadratic([0.1, -0.2]), UNIT_BOX, starts)
    assert a.theta_hat.tobytes() == b.theta_hat.tobytes()
    assert a.objective_at_min == b.objective_at_min
    assert a.gradient_norm_at_min == b.gradient_norm_at_min


def test_minimize_rejects_bad_start():
    def fg(theta):
        return np.nan, np.zeros(2)

    with pytest.raises(BadStart):
        minimize(fg, UNIT_BOX, [np.zeros(2)])


def test_minimize_start_outside_box():
    with pytest.raises(InvalidArgument):
        minimize(quadratic([0.0, 0.0]), UNIT_BOX, [np.array([2.0, 0.0])])


def test_minimize_all_starts_stalled():
    # Gradient pointing uphill everywhere: no Armijo step ever succeeds and
    # the (fake) stationarity level is never reached.
    def fg(theta):
        return 1.0, np.full(2, 10.0) * (1 + np.sum(theta**2))

    with pytest.raises(StalledStart):
        minimize(fg, UNIT_BOX, [np.zeros(2), np.array([0.5, 0.5])])


def test_minimize_logistic_multistart_agrees():
    # Strictly convex objective: every start reaches the same minimizer.
    design = make_uniform_design(200, 2, [0.5, -0.5], seed=912)
    data = sample_outcomes(design, (912, 200, 0))
    fg = value_and_grad(data)
    box = ParamBox(design.theta0 - 3.0, design.theta0 + 3.0, 0.5)
    rng = np.random.default_rng(5)
    starts = [rng.uniform(-2.0, 2.0, size=2) for _ in range(10)]
    runs = [minimize(fg, box, [s]) for s in starts]
    thetas = np.array([r.theta_hat for r in runs])
    assert np.max(np.abs(thetas - thetas[0])) <= 1e-6
    assert all(r.gradient_norm_at_min <= 1e-7 for r in runs)


def test_normalize_statistic_zero_displacement():
    sw = SandwichPair(c_bar=np.eye(2), h_bar=np.eye(2))
    np.testing.assert_allclose(
        normalize_statistic(np.array([0.3, 0.4]), np.array([0.3, 0.4]), 100, sw),
        np.zeros(2),
    )


def test_normalize_statistic_identity_sandwich():
    sw = SandwichPair(c_bar=np.eye(2), h_bar=np.eye(2))
    out = normalize_statistic(np.array([0.5, 0.0]), np.zeros(2), 4, sw)
    np.testing.assert_allclose(out, [1.0, 0.0], atol=1e-12)


def test_normalize_statistic_diagonal_closed_form():
    sw = SandwichPair(c_bar=np.diag([4.0, 1.0]), h_bar=np.diag([2.0, 3.0]))
    out = normalize_statistic(np.array([0.1, 0.1]), np.zeros(2), 100, sw)
    np.testing.assert_allclose(out, [1.0, 3.0], atol=1e-10)


def test_normalize_statistic_linear_in_displacement():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((2, 2))
    sw = SandwichPair(c_bar=a @ a.T + 2 * np.eye(2), h_bar=np.diag([1.5, 0.5]))
    theta0 = np.array([0.2, -0.1])
    d = np.array([0.05, 0.02])
    one = normalize_statistic(theta0 + d, theta0, 50, sw)
    two = normalize_statistic(theta0 + 2 * d, theta0, 50, sw)
    np.testing.assert_allclose(two, 2 * one, rtol=1e-12)


def test_normalize_statistic_degenerate_covariance():
    sw = SandwichPair(c_bar=np.diag([1.0, 0.0]), h_bar=np.eye(2))
    with pytest.raises(NotInvertible):
        normalize_statistic(np.ones(2), np.zeros(2), 10, sw)


def test_sandwich_covariance_examples():
    np.testing.assert_allclose(
        sandwich_covariance(SandwichPair(c_bar=np.eye(2), h_bar=np.eye(2))), np.eye(2)
    )
    np.testing.assert_allclose(
        sandwich_covariance(SandwichPair(c_bar=np.diag([4.0, 9.0]), h_bar=np.diag([2.0, 3.0]))),
        np.eye(2),
        atol=1e-12,
    )


def test_sandwich_covariance_well_specified_is_inverse():
    # With C = H (information equality) the sandwich collapses to H^{-1}.
    rng = np.random.default_rng(1)
    a = rng.standard_normal((3, 3))
    h = a @ a.T + 3 * np.eye(3)
    sw = SandwichPair(c_bar=h.copy(), h_bar=h)
    np.testing.assert_allclose(sandwich_covariance(sw), np.linalg.inv(h), rtol=1e-9)


def test_bonis_bound_plugin_values():
    assert bonis_bound(1.0, 1, 4, 1.0) == pytest.approx(1.0)
    assert bonis_bound(4.0, 2, 100, 1.0) == pytest.approx(1.6)


def test_bonis_bound_quadruple_n_halves():
    b1 = bonis_bound(2.5, 3, 50, 0.7)
    b2 = bonis_bound(2.5, 3, 200, 0.7)
    assert b2 == pytest.approx(b1 / 2.0)


def test_bonis_bound_rejects_bad_inputs():
    for args in [(-1.0, 1, 4, 1.0), (1.0, 1, 0, 1.0), (1.0, 1, 4, 0.0)]:
        with pytest.raises(InvalidArgument):
            bonis_bound(*args)


def test_w1_contraction_of_linear_maps_on_statistic_samples():
    # Lipschitz contraction of the transport distance under a linear map,
    # checked with the exact small-sample solver.
    rng = np.random.default_rng(17)
    for trial in range(10):
        a = rng.standard_normal((40, 2))
        b = rng.standard_normal((40, 2)) + rng.standard_normal(2) * 0.3
        l_map = rng.standard_normal((2, 2))
        rho1 = np.linalg.norm(l_map, 2)
        base = w1_exact_pair(a, b).value
        mapped = w1_exact_pair(a @ l_map.T, b @ l_map.T).value
        assert mapped <= rho1 * base + 1e-9
