"""Dense linear algebra helpers shared by the oracle and training code.

Everything operates on 64-bit floats.  Inputs are validated once at the
boundary (shape agreement, finiteness) so the numerical routines can assume
clean data.  Least-squares problems are solved through an SVD pseudoinverse
with a fixed singular-value cutoff, which keeps rank-deficient systems
well defined without any caller-side special casing.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError

# Singular values below max(rows, cols) * sigma_max * RCOND_FACTOR are
# treated as zero in least-squares solves.
RCOND_FACTOR = 1e-12


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a 2-D float64 array, rejecting non-finite entries."""
    out = np.asarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise ShapeError(f"expected a 2-D array, got ndim={out.ndim}")
    if not np.all(np.isfinite(out)):
        raise ValueError("matrix contains NaN or Inf entries")
    return out


def as_vector(v) -> np.ndarray:
    """Coerce ``v`` to a 1-D float64 array, rejecting non-finite entries."""
    out = np.asarray(v, dtype=np.float64)
    if out.ndim != 1:
        raise ShapeError(f"expected a 1-D array, got ndim={out.ndim}")
    if not np.all(np.isfinite(out)):
        raise ValueError("vector contains NaN or Inf entries")
    return out


def matmul(a, b) -> np.ndarray:
    """Matrix product with an explicit shape check.

    Summation order is the fixed order used by the underlying BLAS, so the
    same inputs always produce bit-identical outputs within one build.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError("matmul expects 2-D operands")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def hadamard(a, b) -> np.ndarray:
    """Elementwise product of two arrays of identical shape."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a * b


def least_squares(a, y) -> tuple[np.ndarray, float]:
    """Minimum-norm least-squares solution of ``a @ w = y``.

    Returns ``(solution, residual_sq)`` where ``residual_sq`` is the squared
    Euclidean norm of ``a @ solution - y``.  Rank deficiency is handled by
    the SVD cutoff described in the module docstring; an all-zero ``a``
    yields the zero solution and ``residual_sq = ||y||^2``.
    """
    a = as_matrix(a)
    y = as_vector(y)
    if a.shape[0] != y.shape[0]:
        raise ShapeError(f"{a.shape[0]} rows vs {y.shape[0]} targets")
    rcond = max(a.shape) * RCOND_FACTOR
    solution = np.linalg.lstsq(a, y, rcond=rcond)[0]
    residual = a @ solution - y
    return solution, float(residual @ residual)


def matrix_rank(a) -> int:
    """Numerical rank under the same singular-value cutoff as the solver."""
    a = as_matrix(a)
    if a.size == 0:
        return 0
    sv = np.linalg.svd(a, compute_uv=False)
    cutoff = max(a.shape) * RCOND_FACTOR * (sv[0] if sv.size else 0.0)
    return int(np.sum(sv > cutoff))


def project_onto_colspace(a, y) -> np.ndarray:
    """Orthogonal projection of ``y`` onto the column space of ``a``.

    Idempotent up to roundoff; the projection and its residual are
    orthogonal, so their squared norms add up to ``||y||^2``.
    """
    solution, _ = least_squares(a, y)
    return np.asarray(a, dtype=np.float64) @ solution
