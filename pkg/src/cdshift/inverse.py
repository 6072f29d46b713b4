"""Canonical right inverse of a surjective ``T - z0``.

The canonical right inverse is the right inverse whose range is the
orthogonal complement of the kernel.  That is exactly the minimal-norm right
inverse, so it is obtained from the pseudoinverse of the exact-row block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import (
    DEFAULT_TOL,
    KernelBasis,
    TruncatedOperator,
    WindowError,
    kernel_basis,
    surjectivity_margin,
)

__all__ = [
    "NotSurjectiveError",
    "CanonicalInverse",
    "InverseVerdict",
    "canonical_right_inverse",
    "verify_canonical_right_inverse",
]


class NotSurjectiveError(ValueError):
    """Raised when the surjectivity margin of ``T - z0`` is within tolerance of 0."""


@dataclass(frozen=True)
class CanonicalInverse:
    B: TruncatedOperator
    z0: complex
    right_identity_residual: float
    range_orthogonality_residual: float
    window: int
    kernel: KernelBasis


@dataclass(frozen=True)
class InverseVerdict:
    right_identity_residual: float
    range_orthogonality_residual: float
    deviation: float
    tol: float

    @property
    def right_identity(self) -> bool:
        return self.right_identity_residual <= self.tol

    @property
    def range_orthogonal(self) -> bool:
        return self.range_orthogonality_residual <= self.tol

    @property
    def matches_canonical(self) -> bool:
        return self.deviation <= self.tol

    @property
    def passed(self) -> bool:
        return self.right_identity and self.range_orthogonal and self.matches_canonical

    @property
    def failed_clause(self) -> str | None:
        if not self.right_identity:
            return "not a right inverse"
        if not self.range_orthogonal:
            return "not canonical"
        if not self.matches_canonical:
            return "differs from canonical"
        return None


def _exact_block(T: TruncatedOperator, z0: complex) -> np.ndarray:
    W = T.row_window
    if W == 0:
        raise WindowError(f"no exact rows in a truncation of order {T.N}")
    return (T.entries - z0 * np.eye(T.N))[:W]


def canonical_right_inverse(
    T: TruncatedOperator, z0: complex = 0.0, tol: float = DEFAULT_TOL
) -> CanonicalInverse:
    """Minimal-norm right inverse ``B`` of ``T - z0`` on the exact window.

    ``B`` is returned as an N x N operator whose columns beyond the row window
    of ``T`` are zero; only the leading ``W`` columns carry information.

    Raises
    ------
    NotSurjectiveError
        If the surjectivity margin is at most ``tol * ||T - z0||``.
    WindowError
        If the truncation leaves no exact rows.
    """
    A = _exact_block(T, z0)
    W = A.shape[0]
    margin = surjectivity_margin(T, z0)
    scale = float(np.linalg.norm(A, 2))
    if margin.value <= tol * scale or scale == 0.0:
        raise NotSurjectiveError(
            f"T - z0 is not surjective at z0={z0}: margin {margin.value:.3e}"
        )
    Bw = np.linalg.pinv(A)
    entries = np.zeros((T.N, T.N), dtype=complex)
    entries[:, :W] = Bw
    B = TruncatedOperator(entries, "dense")
    Q = kernel_basis(T, z0, tol)
    right = float(np.linalg.norm(A @ Bw - np.eye(W), 2))
    orth = float(np.linalg.norm(Q.columns.conj().T @ Bw, 2)) if Q.dim else 0.0
    return CanonicalInverse(B, complex(z0), right, orth, W, Q)


def verify_canonical_right_inverse(
    T: TruncatedOperator,
    z0: complex,
    B_candidate: TruncatedOperator | np.ndarray,
    tol: float = DEFAULT_TOL,
) -> InverseVerdict:
    """Check a candidate against the three defining clauses on the window.

    The clauses are ``(T - z0) B = I``, ``ran B`` orthogonal to the kernel,
    and agreement with the canonical inverse (which the first two force).
    """
    cand = B_candidate.entries if isinstance(B_candidate, TruncatedOperator) else np.asarray(B_candidate)
    if cand.shape != T.entries.shape:
        raise ValueError(f"shape mismatch: {cand.shape} vs {T.entries.shape}")
    A = _exact_block(T, z0)
    W = A.shape[0]
    C = cand[:, :W]
    ref = canonical_right_inverse(T, z0, tol)
    Q = ref.kernel.columns
    right = float(np.linalg.norm(A @ C - np.eye(W), 2))
    orth = float(np.linalg.norm(Q.conj().T @ C, 2)) if Q.shape[1] else 0.0
    dev = float(np.linalg.norm(C - ref.B.entries[:, :W], 2))
    return InverseVerdict(right, orth, dev, tol)
