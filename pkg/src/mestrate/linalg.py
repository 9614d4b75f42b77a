"""Dense symmetric linear algebra shared by all modules.

Eigendecomposition, symmetric matrix square roots, the operator that zeroes
off-diagonal entries, and the validation helpers enforcing the symmetric
matrix contract (finite entries, relative symmetry within 1e-12).

All routines are pure; returned arrays are fresh and safe to share.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidMatrix, NotInvertible, NotPSD

SYMMETRY_RTOL = 1e-12
# Covariance matrices estimated from data routinely carry tiny negative
# eigenvalues; anything above -1e-10 * lambda_max is clamped to zero.
PSD_CLAMP_RTOL = 1e-10
PD_RTOL = 1e-12


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition with eigenvalues sorted in descending order."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def lambda_max(self):
        return float(self.eigenvalues[0])

    @property
    def lambda_min(self):
        return float(self.eigenvalues[-1])

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def check_symmetric(a, name="matrix"):
    """Validate and return a square symmetric float matrix.

    Raises InvalidMatrix for non-finite entries, non-square shape, or an
    entry pair with |a_ij - a_ji| > 1e-12 * max(1, |a_ij|).
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidMatrix(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidMatrix(f"{name} contains NaN or Inf")
    tol = SYMMETRY_RTOL * np.maximum(1.0, np.abs(a))
    if not np.all(np.abs(a - a.T) <= tol):
        worst = float(np.max(np.abs(a - a.T)))
        raise InvalidMatrix(f"{name} is not symmetric (max |a_ij - a_ji| = {worst:.3e})")
    return a


def sym_eig(a):
    """Eigendecomposition of a symmetric matrix, eigenvalues descending."""
    a = check_symmetric(a)
    w, v = np.linalg.eigh(a)
    return Spectrum(eigenvalues=w[::-1].copy(), eigenvectors=v[:, ::-1].copy())


def sym_sqrt(a):
    """Unique symmetric PSD square root of a symmetric PSD matrix.

    Eigenvalues in [-1e-10 * lambda_max, 0) are clamped to zero; anything
    more negative raises NotPSD.
    """
    spec = sym_eig(a)
    w = spec.eigenvalues
    scale = max(spec.lambda_max, 0.0)
    if spec.lambda_min < -PSD_CLAMP_RTOL * max(scale, 1e-300):
        raise NotPSD(
            f"matrix is not PSD: lambda_min = {spec.lambda_min:.3e}, "
            f"lambda_max = {spec.lambda_max:.3e}"
        )
    w = np.clip(w, 0.0, None)
    v = spec.eigenvectors
    s = (v * np.sqrt(w)) @ v.T
    return 0.5 * (s + s.T)


def sym_inv_sqrt(a):
    """Inverse of the symmetric square root of a symmetric PD matrix."""
    spec = sym_eig(a)
    scale = max(spec.lambda_max, 0.0)
    if spec.lambda_min <= PD_RTOL * max(scale, 1e-300):
        raise NotInvertible(
            f"matrix is numerically singular: lambda_min = {spec.lambda_min:.3e}"
        )
    v = spec.eigenvectors
    t = (v / np.sqrt(spec.eigenvalues)) @ v.T
    return 0.5 * (t + t.T)


def diag_part(a):
    """Zero the off-diagonal entries of a square matrix (idempotent)."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidMatrix(f"diag_part expects a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidMatrix("diag_part input contains NaN or Inf")
    return np.diag(np.diag(a).copy())


def lambda_min(a):
    """Smallest eigenvalue of a symmetric matrix."""
    return float(np.linalg.eigvalsh(check_symmetric(a))[0])
