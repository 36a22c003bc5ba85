"""Matched-filter family detectors and covariance estimators.

Every statistic is evaluated in whitened coordinates: with ``Sigma = L L^H``,
``p^H Sigma^{-1} y`` becomes ``(L^{-1} p)^H (L^{-1} y)``. Scalar entry points
wrap the batched ones, which take observations as rows of an (M, N) array.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np
from scipy import stats
from scipy.linalg import solve_triangular

from src.errors import (
    DegenerateSample,
    DimensionMismatch,
    DomainError,
    EmptySecondaryData,
    InsufficientSecondaryData,
    NotConverged,
    ZeroObservation,
)
from src.linalg.complex_linalg import (
    HermitianMatrix,
    batched_cholesky,
    batched_whiten,
    cholesky,
)
from src.scenario.generator import SecondaryData

logger = logging.getLogger(__name__)

TYLER_TOL = 1e-6
TYLER_MAX_ITER = 100

SecondaryLike = Union[SecondaryData, np.ndarray]


class Estimator(str, Enum):
    KNOWN = "Known"
    SCM = "SCM"
    TYLER_FP = "TylerFP"


@dataclass(frozen=True)
class DetectorStatistic:
    """Non-negative detection statistic; NMF-family values also lie in [0, 1]."""

    value: float
    normalized: bool = False

    def __post_init__(self):
        if not math.isfinite(self.value) or self.value < 0:
            raise DomainError(f"statistic must be finite and non-negative, got {self.value}")
        if self.normalized and self.value > 1.0 + 1e-12:
            raise DomainError(f"normalized statistic exceeds 1: {self.value}")

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True, eq=False)
class CovEstimate:
    matrix: HermitianMatrix
    estimator: Estimator
    iterations: int = 0
    converged: bool = True


def _rows(y: np.ndarray, n: int) -> np.ndarray:
    y = np.atleast_2d(np.asarray(y, dtype=np.complex128))
    if y.shape[-1] != n:
        raise DimensionMismatch(f"observation length {y.shape[-1]} != {n}")
    return y


def _secondary_array(secondary: SecondaryLike) -> np.ndarray:
    z = secondary.z if isinstance(secondary, SecondaryData) else secondary
    return np.asarray(z, dtype=np.complex128)


def _whitened_forms(y: np.ndarray, p: np.ndarray, factor: np.ndarray) -> Tuple[np.ndarray, float, np.ndarray]:
    """``|p^H S^-1 y|^2``, ``p^H S^-1 p`` and ``y^H S^-1 y`` for rows of ``y``."""
    pw = solve_triangular(factor, p, lower=True, check_finite=False)
    yw = solve_triangular(factor, y.T, lower=True, check_finite=False).T
    cross = np.abs(yw @ pw.conj()) ** 2
    return cross, float(np.vdot(pw, pw).real), np.sum(np.abs(yw) ** 2, axis=-1)


def _batched_forms(y: np.ndarray, p: np.ndarray, factors: np.ndarray):
    """Same forms with one factor per row: factors (B, N, N), y (B, N)."""
    pw = batched_whiten(factors, np.broadcast_to(p, y.shape).copy())
    yw = batched_whiten(factors, y)
    cross = np.abs(np.sum(pw.conj() * yw, axis=-1)) ** 2
    return cross, np.sum(np.abs(pw) ** 2, axis=-1), np.sum(np.abs(yw) ** 2, axis=-1)


def _forms(y: np.ndarray, p: np.ndarray, cov):
    p = np.asarray(p, dtype=np.complex128)
    if isinstance(cov, HermitianMatrix):
        if p.shape != (cov.n,):
            raise DimensionMismatch(f"steering length {p.shape} != {cov.n}")
        return _whitened_forms(_rows(y, cov.n), p, cholesky(cov).entries)
    cov = np.asarray(cov, dtype=np.complex128)
    n = cov.shape[-1]
    y = _rows(y, n)
    if cov.ndim == 2:
        return _whitened_forms(y, p, batched_cholesky(cov[None])[0])
    if cov.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"{cov.shape[0]} covariances for {y.shape[0]} observations")
    return _batched_forms(y, p, batched_cholesky(cov))


def mf_statistics(y: np.ndarray, p: np.ndarray, cov) -> np.ndarray:
    """Matched filter ``|p^H S^-1 y|^2 / (p^H S^-1 p)`` for each row of ``y``.

    Args:
        y: Observations, shape (M, N) or (N,).
        p: Steering vector, shape (N,).
        cov: HermitianMatrix, an (N, N) array, or a stack (M, N, N) with one
            covariance per observation.
    """
    cross, pp, _ = _forms(y, p, cov)
    return cross / pp


def nmf_statistics(y: np.ndarray, p: np.ndarray, cov) -> np.ndarray:
    """Normalized matched filter, scale-invariant in ``y`` and bounded by 1.

    Raises:
        ZeroObservation: any row of ``y`` is the zero vector.
    """
    cross, pp, yy = _forms(y, p, cov)
    if np.any(yy == 0):
        raise ZeroObservation("NMF statistic undefined for a zero observation")
    return np.minimum(cross / (pp * yy), 1.0)


def mf_statistic(y: np.ndarray, p: np.ndarray, sigma: HermitianMatrix) -> DetectorStatistic:
    return DetectorStatistic(float(mf_statistics(y, p, sigma)[0]))


def nmf_statistic(y: np.ndarray, p: np.ndarray, sigma: HermitianMatrix) -> DetectorStatistic:
    return DetectorStatistic(float(nmf_statistics(y, p, sigma)[0]), normalized=True)


def scm_batch(z: np.ndarray) -> np.ndarray:
    """``(1/K) sum_k z_k z_k^H`` for each block of a (B, K, N) stack."""
    z = np.asarray(z, dtype=np.complex128)
    if z.shape[-2] == 0:
        raise EmptySecondaryData("sample covariance needs at least one secondary vector")
    cov = np.einsum("bki,bkj->bij", z, z.conj()) / z.shape[-2]
    return 0.5 * (cov + np.swapaxes(cov, -1, -2).conj())


def scm(z: SecondaryLike) -> CovEstimate:
    """Sample covariance matrix of K secondary vectors."""
    z = _secondary_array(z)
    if z.ndim != 2 or z.shape[0] == 0:
        raise EmptySecondaryData("sample covariance needs at least one secondary vector")
    return CovEstimate(HermitianMatrix(scm_batch(z[None])[0]), Estimator.SCM)


def _check_tyler_inputs(z: np.ndarray) -> None:
    k, n = z.shape[-2], z.shape[-1]
    if k == 0:
        raise EmptySecondaryData("Tyler estimator needs secondary data")
    if k < n:
        raise InsufficientSecondaryData(f"Tyler estimator needs K >= N, got K={k}, N={n}")
    if np.any(np.sum(np.abs(z) ** 2, axis=-1) == 0):
        raise DegenerateSample("secondary data contains a zero vector")


def tyler_fp_batch(
    z: np.ndarray, tol: float = TYLER_TOL, max_iter: int = TYLER_MAX_ITER
) -> Tuple[np.ndarray, np.ndarray]:
    """Tyler fixed point for each block of a (B, K, N) stack.

    Iterates ``S <- (N/K) sum_k z_k z_k^H / (z_k^H S^-1 z_k)`` from identity,
    rescaling to trace N after every step. A block stops once the relative
    Frobenius change falls below ``tol``.

    Returns:
        ``(estimates, iterations)`` with shapes (B, N, N) and (B,).

    Raises:
        NotConverged: some block still moving after ``max_iter`` iterations;
            ``trial`` holds the first such block index.
    """
    z = np.asarray(z, dtype=np.complex128)
    _check_tyler_inputs(z)
    blocks, k, n = z.shape
    sigma = np.broadcast_to(np.eye(n, dtype=np.complex128), (blocks, n, n)).copy()
    iterations = np.zeros(blocks, dtype=np.int64)
    residual = np.full(blocks, np.inf)
    active = np.arange(blocks)

    for it in range(1, max_iter + 1):
        if active.size == 0:
            break
        zs = z[active]
        factors = batched_cholesky(sigma[active])
        w = batched_whiten(factors, zs)
        q = np.sum(np.abs(w) ** 2, axis=-1)
        update = (n / k) * np.einsum("bk,bki,bkj->bij", 1.0 / q, zs, zs.conj())
        update = 0.5 * (update + np.swapaxes(update, -1, -2).conj())
        traces = np.trace(update, axis1=-2, axis2=-1).real
        update *= (n / traces)[:, None, None]
        change = np.linalg.norm(update - sigma[active], axis=(-2, -1)) / np.linalg.norm(
            sigma[active], axis=(-2, -1)
        )
        sigma[active] = update
        iterations[active] = it
        residual[active] = change
        active = active[change >= tol]

    if active.size:
        trial = int(active[0])
        logger.warning(
            "Tyler estimator did not converge for %d block(s); first trial %d (residual %.3g)",
            active.size,
            trial,
            residual[trial],
        )
        raise NotConverged(
            f"Tyler fixed point not converged after {max_iter} iterations",
            iterations=max_iter,
            residual=float(residual[trial]),
            trial=trial,
        )
    return sigma, iterations


def tyler_fp(z: SecondaryLike, tol: float = TYLER_TOL, max_iter: int = TYLER_MAX_ITER) -> CovEstimate:
    """Robust scale-free covariance estimate, trace-normalized to N."""
    z = _secondary_array(z)
    if z.ndim != 2:
        raise DimensionMismatch(f"secondary data must be (K, N), got {z.shape}")
    estimates, iterations = tyler_fp_batch(z[None], tol, max_iter)
    return CovEstimate(
        HermitianMatrix.symmetrized(estimates[0]),
        Estimator.TYLER_FP,
        iterations=int(iterations[0]),
        converged=True,
    )


def amf_scm(y: np.ndarray, p: np.ndarray, secondary: SecondaryLike) -> DetectorStatistic:
    return DetectorStatistic(float(mf_statistics(y, p, scm(secondary).matrix)[0]))


def anmf_scm(y: np.ndarray, p: np.ndarray, secondary: SecondaryLike) -> DetectorStatistic:
    return DetectorStatistic(float(nmf_statistics(y, p, scm(secondary).matrix)[0]), normalized=True)


def anmf_fp(
    y: np.ndarray,
    p: np.ndarray,
    secondary: SecondaryLike,
    tol: float = TYLER_TOL,
    max_iter: int = TYLER_MAX_ITER,
) -> DetectorStatistic:
    estimate = tyler_fp(secondary, tol, max_iter)
    return DetectorStatistic(float(nmf_statistics(y, p, estimate.matrix)[0]), normalized=True)


def _check_pfa(pfa: float) -> None:
    if not 0.0 < pfa < 1.0:
        raise DomainError(f"pfa must lie in (0, 1), got {pfa}")


def mf_threshold_analytic(pfa: float) -> float:
    """Known-covariance MF is Exp(1) under H0, so ``lambda = -ln(pfa)``."""
    _check_pfa(pfa)
    return -math.log(pfa)


def nmf_threshold_analytic(pfa: float, n: int) -> float:
    """NMF is Beta(1, N-1) under Gaussian H0: ``lambda = 1 - pfa^(1/(N-1))``."""
    _check_pfa(pfa)
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    return 1.0 - pfa ** (1.0 / (n - 1))


def mf_pd_analytic(snr_linear: float, pfa: float) -> float:
    """Marcum ``Q_1(sqrt(2 SNR), sqrt(-2 ln pfa))`` for the known-covariance MF."""
    _check_pfa(pfa)
    if snr_linear < 0 or not math.isfinite(snr_linear):
        raise DomainError(f"snr must be finite and non-negative, got {snr_linear}")
    b2 = 2.0 * mf_threshold_analytic(pfa)
    if snr_linear == 0:
        return float(stats.chi2.sf(b2, 2))
    return float(stats.ncx2.sf(b2, 2, 2.0 * snr_linear))


def analytic_threshold(name: str, pfa: float, n: int) -> Optional[float]:
    """Closed-form Gaussian threshold where one exists (MF, NMF), else None."""
    if name == "MF":
        return mf_threshold_analytic(pfa)
    if name == "NMF":
        return nmf_threshold_analytic(pfa, n)
    return None
