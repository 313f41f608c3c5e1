"""Dense symmetric-matrix kernel.

Matrices are plain ``numpy`` arrays; dimensions stay small (n <= 12), so there
are no sparse or blocked code paths.  The two block inverses are written out
from their Schur-complement formulas rather than delegated to ``inv`` so that
they can serve as independent routes to the same inverse.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, InternalConsistencyError, NotPositiveDefinite, SingularBlockError

PD_PIVOT_TOL = 1e-14
# Condition number beyond which a block is reported as singular.
SINGULAR_COND = 1e14


def as_symmetric(S, *, name: str = "matrix") -> np.ndarray:
    """Validate a square, exactly symmetric, finite matrix and return it as float."""
    A = np.array(S, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainError(f"{name} has non-finite entries")
    if not np.array_equal(A, A.T):
        raise DomainError(f"{name} is not symmetric")
    return A


def cholesky(S) -> np.ndarray:
    """Lower-triangular ``M`` with ``M @ M.T == S``.

    Raises ``NotPositiveDefinite`` when a pivot falls to ``PD_PIVOT_TOL`` or below.
    """
    A = as_symmetric(S)
    n = A.shape[0]
    L = np.zeros_like(A)
    for j in range(n):
        pivot = A[j, j] - L[j, :j] @ L[j, :j]
        if not pivot > PD_PIVOT_TOL:
            raise NotPositiveDefinite(
                f"matrix is not positive definite (pivot {j} = {pivot:.3g})", pivot_index=j, pivot=pivot
            )
        L[j, j] = math.sqrt(pivot)
        L[j + 1:, j] = (A[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


def is_positive_definite(S) -> bool:
    try:
        cholesky(S)
    except NotPositiveDefinite:
        return False
    return True


def is_correlation(S, *, atol: float = 1e-12) -> bool:
    """Unit diagonal, entries in [-1, 1] and positive definite."""
    A = np.asarray(S, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or not np.array_equal(A, A.T):
        return False
    if np.any(np.abs(np.diag(A) - 1.0) > atol) or np.any(np.abs(A) > 1.0 + atol):
        return False
    return is_positive_definite(A)


def as_correlation(S, *, name: str = "Sigma") -> np.ndarray:
    A = as_symmetric(S, name=name)
    if np.any(np.abs(np.diag(A) - 1.0) > 1e-12):
        raise DomainError(f"{name} must have unit diagonal")
    cholesky(A)
    return A


def correlation_from_covariance(S) -> tuple[np.ndarray, np.ndarray]:
    """Split a covariance into (correlation matrix, standard deviations)."""
    A = as_symmetric(S)
    sd = np.sqrt(np.diag(A))
    if np.any(sd <= 0.0):
        raise DomainError("covariance has a non-positive variance")
    R = A / np.outer(sd, sd)
    R = 0.5 * (R + R.T)
    np.fill_diagonal(R, 1.0)
    return R, sd


@dataclass(frozen=True)
class BlockPartition:
    """Blocks of a square matrix split after row/column ``k``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    @classmethod
    def split(cls, S, k: int) -> "BlockPartition":
        M = np.asarray(S, dtype=float)
        n = M.shape[0]
        if not 1 <= k <= n - 1:
            raise DomainError(f"split index must be in [1, {n - 1}], got {k}")
        return cls(M[:k, :k], M[:k, k:], M[k:, :k], M[k:, k:])

    @property
    def k(self) -> int:
        return self.A.shape[0]

    def assemble(self) -> np.ndarray:
        return np.block([[self.A, self.B], [self.C, self.D]])


def _checked_inv(X: np.ndarray, block: str) -> np.ndarray:
    if not np.all(np.isfinite(X)) or np.linalg.cond(X) > SINGULAR_COND:
        raise SingularBlockError(f"block {block} is singular or numerically singular", block=block)
    return np.linalg.inv(X)


def _as_partition(P, k):
    if isinstance(P, BlockPartition):
        return P
    if k is None:
        raise TypeError("pass a BlockPartition or a matrix together with a split index k")
    return BlockPartition.split(P, k)


def block_inverse_lower(P, k: int | None = None) -> np.ndarray:
    """Inverse through the Schur complement ``D - C A^-1 B`` of the leading block."""
    P = _as_partition(P, k)
    Ai = _checked_inv(P.A, "A")
    S = P.D - P.C @ Ai @ P.B
    Si = _checked_inv(S, "D - C A^-1 B")
    top_left = Ai + Ai @ P.B @ Si @ P.C @ Ai
    top_right = -Ai @ P.B @ Si
    bottom_left = -Si @ P.C @ Ai
    return np.block([[top_left, top_right], [bottom_left, Si]])


def block_inverse_upper(P, k: int | None = None) -> np.ndarray:
    """Inverse through the Schur complement ``A - B D^-1 C`` of the trailing block."""
    P = _as_partition(P, k)
    Di = _checked_inv(P.D, "D")
    S = P.A - P.B @ Di @ P.C
    Si = _checked_inv(S, "A - B D^-1 C")
    top_right = -Si @ P.B @ Di
    bottom_left = -Di @ P.C @ Si
    bottom_right = Di + Di @ P.C @ Si @ P.B @ Di
    return np.block([[Si, top_right], [bottom_left, bottom_right]])


def reduced_schur_complement(S) -> np.ndarray:
    """``Sigma_1 - t t'`` for a unit-diagonal PD ``S = [[Sigma_1, t], [t', 1]]``.

    The result is certified positive definite by a Cholesky factorization.
    """
    A = as_correlation(S, name="S")
    t = A[:-1, -1]
    R = A[:-1, :-1] - np.outer(t, t)
    R = 0.5 * (R + R.T)
    cholesky(R)
    return R


def det_sym(S) -> float:
    """Determinant; Cholesky when PD, LU otherwise."""
    A = np.asarray(S, dtype=float)
    try:
        L = cholesky(A)
    except (NotPositiveDefinite, DomainError):
        return float(np.linalg.det(A))
    return float(np.prod(np.diag(L)) ** 2)


def sylvester_reduce(Sigma, T, *, rtol: float = 1e-10) -> float:
    """``det(I + 2 T_1 Sigma_1)`` with the untilted last coordinate dropped.

    ``T`` is a nonnegative diagonal (vector or matrix) whose last entry is zero;
    the reduced determinant is checked against ``det(I_n + 2 T Sigma)``.
    """
    Sig = as_symmetric(Sigma, name="Sigma")
    tvec = np.diag(T) if np.ndim(T) == 2 else np.asarray(T, dtype=float)
    n = Sig.shape[0]
    if tvec.shape != (n,):
        raise DomainError("T must be a length-n diagonal")
    if np.any(tvec < 0.0) or tvec[-1] != 0.0:
        raise DomainError("T must be nonnegative with a zero last entry")
    reduced = float(np.linalg.det(np.eye(n - 1) + 2.0 * tvec[:-1, None] * Sig[:-1, :-1]))
    full = float(np.linalg.det(np.eye(n) + 2.0 * tvec[:, None] * Sig))
    if abs(reduced - full) > rtol * max(abs(full), abs(reduced)):
        raise InternalConsistencyError(f"det reduction mismatch: {reduced!r} vs {full!r}")
    return reduced


def shrink_to_pd(S, m: float) -> np.ndarray:
    """``(S + I/m) / (1 + 1/m)``: a PD correlation matrix tending to ``S`` as m grows."""
    if not m > 0:
        raise DomainError("m must be positive")
    A = np.asarray(S, dtype=float)
    out = (A + np.eye(A.shape[0]) / m) / (1.0 + 1.0 / m)
    np.fill_diagonal(out, 1.0)
    return out


def matrix_to_json(S) -> dict:
    A = np.asarray(S, dtype=float)
    return {"n": int(A.shape[0]), "rows": [[float(x) for x in row] for row in A]}


def matrix_from_json(obj) -> np.ndarray:
    """Parse ``{"n": int, "rows": [[...], ...]}``."""
    try:
        n = int(obj["n"])
        rows = obj["rows"]
    except (KeyError, TypeError) as exc:
        raise DomainError('matrix JSON needs "n" and "rows"') from exc
    A = np.array(rows, dtype=float)
    if A.shape != (n, n):
        raise DomainError(f'"rows" must be {n}x{n}, got shape {A.shape}')
    return as_symmetric(A)


def load_matrix(path) -> np.ndarray:
    return matrix_from_json(json.loads(Path(path).read_text()))
