"""Dense complex linear algebra kernel.

Thin wrappers around LAPACK (via numpy) that enforce the numerical contracts
the rest of the simulator relies on: singular values sorted non-increasing,
explicit failure instead of silent garbage, and conditioning checks before
any Hermitian inverse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankDeficientError, SvdConvergenceError

# Beyond this condition number a Hermitian system is treated as rank-deficient.
CONDITION_LIMIT = 1e12


def as_matrix(a) -> np.ndarray:
    """Coerce input to a finite, non-empty 2-D complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.size == 0:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains NaN or Inf entries")
    return m


def herm(a: np.ndarray) -> np.ndarray:
    """Hermitian (conjugate) transpose, batched over leading axes."""
    return np.conjugate(np.swapaxes(a, -2, -1))


@dataclass(frozen=True)
class SvdResult:
    """Full SVD ``a = u @ diag(singular_values) @ herm(v)``.

    ``u`` is rows x rows, ``v`` is cols x cols, both unitary; singular values
    are sorted non-increasing so that column 0 of ``v`` is always the dominant
    right singular vector.
    """

    u: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        rows, cols = self.u.shape[0], self.v.shape[0]
        sigma = np.zeros((rows, cols), dtype=np.complex128)
        k = self.singular_values.shape[0]
        sigma[:k, :k] = np.diag(self.singular_values)
        return self.u @ sigma @ herm(self.v)


def svd(a) -> SvdResult:
    """Full SVD of a complex matrix with singular values sorted descending.

    Raises SvdConvergenceError if the underlying iteration fails instead of
    returning partial results.
    """
    m = as_matrix(a)
    try:
        u, s, vh = np.linalg.svd(m, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise SvdConvergenceError(f"SVD did not converge: {exc}") from exc
    return SvdResult(u=u, singular_values=s, v=herm(vh))


def singular_values(a) -> np.ndarray:
    """Singular values only (also accepts a batch with leading axes)."""
    m = np.asarray(a, dtype=np.complex128)
    try:
        return np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise SvdConvergenceError(f"SVD did not converge: {exc}") from exc


def kronecker(a, b) -> np.ndarray:
    """Kronecker product; entry ((i*br+k), (j*bc+n)) = a[i,j] * b[k,n]."""
    return np.kron(as_matrix(a), as_matrix(b))


def hermitian_condition(a: np.ndarray) -> float:
    """Condition estimate of a Hermitian matrix (inf if not positive definite)."""
    w = np.linalg.eigvalsh(0.5 * (a + herm(a)))
    if w[0] <= 0.0:
        return np.inf
    return float(w[-1] / w[0])


def hermitian_solve(a, b) -> np.ndarray:
    """Solve a @ x = b for Hermitian positive definite a.

    Raises RankDeficientError when a is singular or its condition estimate
    exceeds CONDITION_LIMIT.
    """
    am = as_matrix(a)
    bm = as_matrix(b)
    if am.shape[0] != am.shape[1]:
        raise ValueError(f"matrix must be square, got shape {am.shape}")
    if bm.shape[0] != am.shape[0]:
        raise ValueError(f"rhs rows {bm.shape[0]} do not match matrix size {am.shape[0]}")
    scale = np.linalg.norm(am)
    if np.linalg.norm(am - herm(am)) > 1e-10 * max(1.0, scale):
        raise ValueError("matrix is not Hermitian within tolerance")
    cond = hermitian_condition(am)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise RankDeficientError(f"condition estimate {cond:.3e} exceeds {CONDITION_LIMIT:.0e}")
    return np.linalg.solve(am, bm)
