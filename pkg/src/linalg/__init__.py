from .complex_linalg import (
    HermitianMatrix,
    LowerTriangular,
    as_complex_vector,
    cholesky,
    sesquilinear,
    solve_hermitian,
    toeplitz_covariance,
)

__all__ = [
    "HermitianMatrix",
    "LowerTriangular",
    "as_complex_vector",
    "cholesky",
    "sesquilinear",
    "solve_hermitian",
    "toeplitz_covariance",
]
