"""Hermitian covariance kernel: construction, Cholesky, solves, quadratic forms.

Complex vectors are 1-D ``complex128`` numpy arrays and complex scalars are
Python ``complex`` values. Matrices that must stay Hermitian are wrapped in
:class:`HermitianMatrix`, which validates once and freezes its storage.
Inverses are never formed; every ``Sigma^{-1}`` form goes through a Cholesky
factor.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from src.errors import DimensionMismatch, DomainError, NonPositiveDefinite

HERMITIAN_TOL = 1e-12
PD_PIVOT_THRESHOLD = 1e-14


def as_complex_vector(values, n: Optional[int] = None) -> np.ndarray:
    """Validate and copy ``values`` into a finite 1-D complex vector.

    Args:
        values: Array-like of complex numbers.
        n: Required length, if any.

    Returns:
        Read-only complex128 array.
    """
    vec = np.array(values, dtype=np.complex128)
    if vec.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {vec.shape}")
    if n is not None and vec.shape[0] != n:
        raise DimensionMismatch(f"expected length {n}, got {vec.shape[0]}")
    if not np.all(np.isfinite(vec)):
        raise DomainError("vector has non-finite entries")
    vec.setflags(write=False)
    return vec


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """Square complex matrix equal to its conjugate transpose."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.complex128)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise DomainError("matrix has non-finite entries")
        if np.max(np.abs(a - a.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise DomainError("matrix is not Hermitian")
        if np.max(np.abs(np.diag(a).imag), initial=0.0) > HERMITIAN_TOL:
            raise DomainError("Hermitian diagonal must be real")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, n: int) -> "HermitianMatrix":
        return cls(np.eye(n, dtype=np.complex128))

    @classmethod
    def symmetrized(cls, a: np.ndarray) -> "HermitianMatrix":
        """Wrap a numerically Hermitian matrix after averaging with its adjoint."""
        a = np.asarray(a, dtype=np.complex128)
        return cls(0.5 * (a + a.conj().T))

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.complex128)
        if v.shape[-1] != self.n:
            raise DimensionMismatch(f"vector length {v.shape[-1]} != matrix size {self.n}")
        return v @ self.entries.T

    def __add__(self, other: "HermitianMatrix") -> "HermitianMatrix":
        return HermitianMatrix(self.entries + other.entries)

    def scaled(self, factor: float) -> "HermitianMatrix":
        return HermitianMatrix(float(factor) * self.entries)

    def trace(self) -> float:
        return float(np.trace(self.entries).real)


@dataclass(frozen=True, eq=False)
class LowerTriangular:
    """Cholesky factor: zero above the diagonal, positive real diagonal."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.complex128)
        if np.any(np.triu(a, k=1) != 0):
            raise DomainError("factor has entries above the diagonal")
        diag = np.diag(a)
        if np.any(diag.imag != 0) or np.any(diag.real <= 0):
            raise DomainError("factor diagonal must be real and positive")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def reconstruct(self) -> np.ndarray:
        return self.entries @ self.entries.conj().T

    def whiten(self, b: np.ndarray) -> np.ndarray:
        """Solve ``L w = b`` by forward substitution.

        ``b`` may be a vector or a stack of row vectors of shape (M, n).
        """
        b = np.asarray(b, dtype=np.complex128)
        if b.shape[-1] != self.n:
            raise DimensionMismatch(f"vector length {b.shape[-1]} != factor size {self.n}")
        if b.ndim == 1:
            return scipy.linalg.solve_triangular(self.entries, b, lower=True, check_finite=False)
        return scipy.linalg.solve_triangular(self.entries, b.T, lower=True, check_finite=False).T


def toeplitz_covariance(rho: float, n: int) -> HermitianMatrix:
    """Exponential-correlation Toeplitz covariance with entries ``rho**|i-j|``.

    Raises:
        DomainError: rho outside [0, 1) or n < 1.
    """
    if not 0.0 <= rho < 1.0:
        raise DomainError(f"rho must lie in [0, 1), got {rho}")
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    column = np.power(float(rho), np.arange(n, dtype=np.float64))
    return HermitianMatrix(scipy.linalg.toeplitz(column).astype(np.complex128))


def _check_pivots(diag: np.ndarray) -> None:
    if np.any(~np.isfinite(diag)) or np.any(diag.real ** 2 <= PD_PIVOT_THRESHOLD):
        raise NonPositiveDefinite(f"Cholesky pivot at or below {PD_PIVOT_THRESHOLD}")


def cholesky(m: HermitianMatrix) -> LowerTriangular:
    """Lower Cholesky factor ``L`` with ``L L^H = m``.

    Raises:
        NonPositiveDefinite: Any pivot at or below 1e-14.
    """
    try:
        factor = np.linalg.cholesky(m.entries)
    except np.linalg.LinAlgError as e:
        raise NonPositiveDefinite(str(e)) from e
    _check_pivots(np.diag(factor))
    return LowerTriangular(np.tril(factor))


def batched_cholesky(stack: np.ndarray) -> np.ndarray:
    """Cholesky factors of a stack of Hermitian matrices, shape (B, n, n)."""
    try:
        factors = np.linalg.cholesky(stack)
    except np.linalg.LinAlgError as e:
        raise NonPositiveDefinite(str(e)) from e
    _check_pivots(np.diagonal(factors, axis1=-2, axis2=-1))
    return factors


def batched_whiten(factors: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``L_i w = b_i`` for stacked factors (B, n, n) and vectors (B, ..., n).

    Returns:
        Whitened vectors with the shape of ``b``.
    """
    rhs = np.swapaxes(b, -1, -2) if b.ndim == 3 else b[..., None]
    out = np.linalg.solve(factors, rhs)
    return np.swapaxes(out, -1, -2) if b.ndim == 3 else out[..., 0]


def solve_hermitian(m: HermitianMatrix, b: np.ndarray) -> np.ndarray:
    """Solve ``m x = b`` through the Cholesky factor of ``m``."""
    b = np.asarray(b, dtype=np.complex128)
    if b.shape[0] != m.n:
        raise DimensionMismatch(f"right-hand side length {b.shape[0]} != matrix size {m.n}")
    factor = cholesky(m)
    return scipy.linalg.cho_solve((factor.entries, True), b, check_finite=False)


def sesquilinear(a: np.ndarray, m: HermitianMatrix, b: np.ndarray) -> complex:
    """Return ``a^H m b`` (conjugate-linear in ``a``, linear in ``b``)."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != (m.n,) or b.shape != (m.n,):
        raise DimensionMismatch(
            f"vectors {a.shape} and {b.shape} do not match matrix size {m.n}"
        )
    return complex(np.vdot(a, m.entries @ b))


def relative_frobenius(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))
