"""Dense complex-matrix substrate: norms, Hermitian spectra, functional calculus.

All matrices are plain ``numpy.ndarray`` values of dtype complex128.  The
functions here are the only place the package touches LAPACK, so spectral
conventions (ascending eigenvalues, deterministic eigenvector phases) are
fixed once and inherited by everything built on top.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError


@dataclass(frozen=True)
class Tolerance:
    """Numerical slack for "exactly satisfies" checks.

    ``spectral`` guards invertibility thresholds, ``algebraic`` guards
    identity checks such as ``p^2 = p``.  Both must lie in (0, 1e-4).
    """

    spectral: float = 1e-10
    algebraic: float = 1e-10

    def __post_init__(self) -> None:
        for name in ("spectral", "algebraic"):
            value = getattr(self, name)
            if not (0.0 < value < 1e-4):
                raise ValueError(f"{name} tolerance must lie in (0, 1e-4), got {value!r}")


DEFAULT_TOL = Tolerance()


def as_operator(m) -> np.ndarray:
    """Validate m as a square complex matrix with finite entries."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def herm_part(a: np.ndarray) -> np.ndarray:
    return (a + dagger(a)) / 2


def identity_like(a: np.ndarray) -> np.ndarray:
    return np.eye(a.shape[0], dtype=np.complex128)


def op_norm(m) -> float:
    """Operator norm (largest singular value)."""
    return float(np.linalg.norm(as_operator(m), 2))


def commutator(a, b) -> np.ndarray:
    """ab - ba for equal-dimension square matrices."""
    a = as_operator(a)
    b = as_operator(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


@dataclass(frozen=True)
class HermitianSpectrum:
    """Eigenvalues (ascending) and a matching orthonormal eigenbasis.

    Eigenvector phases are fixed so the first significant component of each
    column is positive real, making repeated runs reproducible.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues) @ dagger(self.eigenvectors)


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    v = vectors.copy()
    for j in range(v.shape[1]):
        col = v[:, j]
        mags = np.abs(col)
        # first component carrying real weight, not a float shadow of zero
        significant = np.nonzero(mags > 1e-6 * mags.max())[0]
        lead = col[significant[0]]
        v[:, j] = col * (lead.conjugate() / abs(lead))
    return v


def hermitian_eig(m, tol: Tolerance = DEFAULT_TOL) -> HermitianSpectrum:
    """Spectral decomposition of a Hermitian matrix.

    The input must be Hermitian within ``tol.algebraic``; it is symmetrized
    before factoring so the decomposition is exactly that of (m + m^H)/2.
    """
    a = as_operator(m)
    defect = op_norm(a - dagger(a))
    if defect > tol.algebraic:
        raise PreconditionError(
            f"matrix is not Hermitian within tolerance: defect {defect:.6e}")
    w, v = np.linalg.eigh(herm_part(a))
    return HermitianSpectrum(eigenvalues=w, eigenvectors=_fix_phases(v))


def spectral_apply(m, f, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Apply a real function to a Hermitian matrix through its spectrum.

    f is evaluated only at the computed eigenvalues, so step functions are
    fine as long as the spectrum stays clear of the jump.
    """
    spec = hermitian_eig(m, tol)
    values = np.array([float(f(float(lam))) for lam in spec.eigenvalues])
    return (spec.eigenvectors * values) @ dagger(spec.eigenvectors)


def polar_unitary(a, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Unitary factor a(a^H a)^(-1/2) of an invertible matrix.

    Computed from the SVD, which is the same matrix evaluated stably.
    Requires the smallest eigenvalue of a^H a to exceed ``tol.spectral``.
    """
    a = as_operator(a)
    w, s, vh = np.linalg.svd(a)
    if float(s[-1]) ** 2 <= tol.spectral:
        raise PreconditionError(
            f"a^H a is singular within tolerance: smallest eigenvalue {float(s[-1])**2:.6e}")
    return w @ vh
