import numpy as np
import pytest

from mestrate.errors import InvalidMatrix, NotInvertible, NotPSD
from mestrate.linalg import diag_part, lambda_min, sym_eig, sym_inv_sqrt, sym_sqrt


def random_spd(dim, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim, dim))
    return scale * (a @ a.T + dim * np.eye(dim))


def test_sym_eig_identity():
    spec = sym_eig(np.eye(3))
    np.testing.assert_allclose(spec.eigenvalues, [1.0, 1.0, 1.0])


def test_sym_eig_diagonal_descending():
    spec = sym_eig(np.diag([4.0, 9.0]))
    np.testing.assert_allclose(spec.eigenvalues, [9.0, 4.0])


def test_sym_eig_analytic_2x2():
    spec = sym_eig(np.array([[2.0, 1.0], [1.0, 2.0]]))
    np.testing.assert_allclose(spec.eigenvalues, [3.0, 1.0], atol=1e-12)


def test_sym_eig_reconstruction_and_orthonormality():
    for dim in (2, 5, 20, 200):
        a = random_spd(dim, seed=dim)
        spec = sym_eig(a)
        fro = np.linalg.norm(a, "fro")
        assert np.linalg.norm(spec.reconstruct() - a, "fro") <= 1e-10 * max(1.0, fro)
        v = spec.eigenvectors
        assert np.linalg.norm(v.T @ v - np.eye(dim), "fro") <= 1e-10
        assert np.all(np.diff(spec.eigenvalues) <= 1e-12)


def test_sym_eig_rejects_nonfinite():
    bad = np.array([[1.0, np.nan], [np.nan, 1.0]])
    with pytest.raises(InvalidMatrix):
        sym_eig(bad)


def test_sym_eig_rejects_asymmetric():
    with pytest.raises(InvalidMatrix):
        sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_sym_sqrt_identity():
    np.testing.assert_allclose(sym_sqrt(np.eye(2)), np.eye(2), atol=1e-14)


def test_sym_sqrt_diagonal():
    np.testing.assert_allclose(sym_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-12)


def test_sym_sqrt_2x2_eigenvalues_and_square():
    a = np.array([[2.0, 1.0], [1.0, 2.0]])
    s = sym_sqrt(a)
    np.testing.assert_allclose(s @ s, a, atol=1e-12)
    np.testing.assert_allclose(sym_eig(s).eigenvalues, [np.sqrt(3.0), 1.0], atol=1e-12)


def test_sym_sqrt_reconstruction_large_random():
    for dim in (3, 50, 200):
        a = random_spd(dim, seed=100 + dim)
        s = sym_sqrt(a)
        err = np.linalg.norm(s @ s - a, "fro") / max(1.0, np.linalg.norm(a, "fro"))
        assert err <= 1e-10


def test_sym_sqrt_clamps_tiny_negative():
    a = np.diag([1.0, -1e-14])
    s = sym_sqrt(a)
    np.testing.assert_allclose(s, np.diag([1.0, 0.0]), atol=1e-7)


def test_sym_sqrt_rejects_indefinite():
    with pytest.raises(NotPSD):
        sym_sqrt(np.diag([1.0, -0.5]))


def test_sym_inv_sqrt_identity_and_diagonal():
    np.testing.assert_allclose(sym_inv_sqrt(np.eye(2)), np.eye(2), atol=1e-14)
    np.testing.assert_allclose(
        sym_inv_sqrt(np.diag([4.0, 9.0])), np.diag([0.5, 1.0 / 3.0]), atol=1e-12
    )


def test_sym_inv_sqrt_whitens_random_spd():
    a = random_spd(4, seed=7)
    t = sym_inv_sqrt(a)
    assert np.linalg.norm(t @ a @ t - np.eye(4), "fro") <= 1e-9


def test_sym_inv_sqrt_matches_inverse_of_sqrt():
    a = random_spd(6, seed=8)
    t = sym_inv_sqrt(a)
    s_inv = np.linalg.inv(sym_sqrt(a))
    rel = np.linalg.norm(t - s_inv, "fro") / np.linalg.norm(s_inv, "fro")
    assert rel <= 1e-9


def test_sym_inv_sqrt_rejects_singular():
    with pytest.raises(NotInvertible):
        sym_inv_sqrt(np.diag([1.0, 0.0]))


def test_diag_part_examples():
    np.testing.assert_allclose(
        diag_part(np.array([[2.0, 1.0], [1.0, 2.0]])), np.diag([2.0, 2.0])
    )
    np.testing.assert_allclose(diag_part(np.diag([5.0, 7.0])), np.diag([5.0, 7.0]))
    np.testing.assert_allclose(diag_part(np.zeros((3, 3))), np.zeros((3, 3)))


def test_diag_part_idempotent_and_commutes_with_transpose():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((5, 5))
    d = diag_part(a)
    np.testing.assert_allclose(diag_part(d), d)
    np.testing.assert_allclose(diag_part(a.T), diag_part(a).T)


def test_lambda_min():
    assert lambda_min(np.diag([4.0, 9.0])) == pytest.approx(4.0)
