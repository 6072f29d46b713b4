"""Holomorphic cross-sections of the kernel bundle ``z -> ker(T - z)``.

A section near ``z0`` is handled through its Taylor coefficients
``f_0, f_1, ...``; being a section is equivalent to ``(T - z0) f_0 = 0`` and
``(T - z0) f_k = f_{k-1}``.  Canonical sections take ``f_k = B^k u`` with ``B``
the canonical right inverse of ``T - z0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .inverse import CanonicalInverse, canonical_right_inverse
from .operators import (
    DEFAULT_TOL,
    ExactWindow,
    KernelBasis,
    TruncatedOperator,
    kernel_basis,
)
from .series import (
    DEFAULT_ORDER,
    ScalarSeries,
    VectorSeries,
    root_test_radius,
    series_div,
    series_eval,
    series_inner,
    series_mul,
)

__all__ = [
    "NotInKernelError",
    "NotPseudocanonicalError",
    "CrossSection",
    "TupleRelation",
    "PseudocanonicalVerdict",
    "Decomposition",
    "SectionDiagnostics",
    "canonical_section",
    "canonical_tuple",
    "relate_tuples",
    "pseudocanonical_check",
    "pseudocanonicalize",
    "decompose_pseudocanonical",
    "section_diagnostics",
    "section_from_coefficients",
    "orthogonality_gap",
]


class NotInKernelError(ValueError):
    pass


class NotPseudocanonicalError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CrossSection:
    series: VectorSeries
    operator: TruncatedOperator
    z0: complex
    kind: str = "general"

    @property
    def coefficients(self) -> np.ndarray:
        return self.series.coefficients

    @property
    def order(self) -> int:
        return self.series.order

    def __call__(self, z: complex):
        return series_eval(self.series, z).value


def section_from_coefficients(
    T: TruncatedOperator, z0: complex, coefficients, kind: str = "general", window: int | None = None
) -> CrossSection:
    """Wrap user-supplied coefficients ``f_0..f_K`` as a section of ``T`` at ``z0``."""
    coefficients = np.asarray(coefficients, dtype=complex)
    if window is None:
        window = max(0, T.N - coefficients.shape[0] * T.bandwidth)
    return CrossSection(VectorSeries(coefficients, z0, ExactWindow(window)), T, complex(z0), kind)


def _exact_rows(T: TruncatedOperator, z0: complex) -> np.ndarray:
    return (T.entries - z0 * np.eye(T.N))[: T.row_window]


def canonical_section(
    T: TruncatedOperator,
    z0: complex,
    u: np.ndarray,
    K: int = DEFAULT_ORDER,
    tol: float = DEFAULT_TOL,
    inverse: CanonicalInverse | None = None,
) -> CrossSection:
    """Canonical section ``s_u(z) = sum_k B^k u (z - z0)^k`` through order ``K``.

    Raises
    ------
    NotInKernelError
        If ``u`` is not a unit vector of ``ker(T - z0)`` to within ``tol``.
    NotSurjectiveError
        If ``T - z0`` has no right inverse.
    WindowError
        If ``K`` powers would exhaust the exact window.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (T.N,):
        raise ValueError(f"initial vector must have length {T.N}")
    window = ExactWindow(T.N).after(T, K)
    A = _exact_rows(T, z0)
    scale = max(float(np.linalg.norm(A, 2)), 1.0)
    if abs(np.linalg.norm(u) - 1.0) > tol:
        raise NotInKernelError("initial vector must be a unit vector")
    if np.linalg.norm(A @ u) > tol * scale:
        raise NotInKernelError(f"initial vector is not in ker(T - z0), residual {np.linalg.norm(A @ u):.3e}")
    if inverse is None:
        inverse = canonical_right_inverse(T, z0, tol)
    B = inverse.B.entries
    f = np.empty((K + 1, T.N), dtype=complex)
    f[0] = u
    for k in range(1, K + 1):
        f[k] = B @ f[k - 1]
    return CrossSection(VectorSeries(f, z0, window), T, complex(z0), "canonical")


def canonical_tuple(
    T: TruncatedOperator,
    z0: complex,
    Q: KernelBasis | np.ndarray,
    K: int = DEFAULT_ORDER,
    tol: float = DEFAULT_TOL,
) -> list[CrossSection]:
    """One canonical section per column of an orthonormal kernel basis."""
    cols = Q.columns if isinstance(Q, KernelBasis) else np.asarray(Q, dtype=complex)
    if cols.ndim != 2 or cols.shape[0] != T.N:
        raise ValueError("Q must be an N x m matrix")
    if np.linalg.norm(cols.conj().T @ cols - np.eye(cols.shape[1]), 2) > 10 * tol:
        raise ValueError("kernel basis columns are not orthonormal")
    inverse = canonical_right_inverse(T, z0, tol)
    return [canonical_section(T, z0, cols[:, i], K, tol, inverse) for i in range(cols.shape[1])]


@dataclass(frozen=True)
class TupleRelation:
    U: np.ndarray
    unitarity_residual: float
    relation_residual: float


def relate_tuples(t1: Sequence[CrossSection], t2: Sequence[CrossSection]) -> TupleRelation:
    """Matrix ``U`` with ``t2 = t1 U`` and how well it holds coefficient-wise."""
    if len(t1) != len(t2):
        raise ValueError("tuples must have the same length")
    F = np.stack([s.coefficients for s in t1], axis=2)  # (K+1, N, n)
    G = np.stack([s.coefficients for s in t2], axis=2)
    K = min(F.shape[0], G.shape[0])
    F, G = F[:K], G[:K]
    U = F[0].conj().T @ G[0]
    n = U.shape[0]
    unitarity = float(np.linalg.norm(U.conj().T @ U - np.eye(n), 2))
    relation = float(max(np.linalg.norm(G[k] - F[k] @ U, 2) for k in range(K)))
    return TupleRelation(U, unitarity, relation)


@dataclass(frozen=True)
class PseudocanonicalVerdict:
    passed: bool
    residual: float


def pseudocanonical_check(s: CrossSection, tol: float = 1e-10) -> PseudocanonicalVerdict:
    """Test ``<f_k, f_0> = 0`` for ``k >= 1``; residual is the max of ``|<f_k, f_0>| / ||f_0||``."""
    f = s.coefficients
    n0 = np.linalg.norm(f[0])
    if n0 == 0:
        raise ValueError("f_0 = 0: a pseudocanonical section needs a nonzero value at z0")
    if f.shape[0] == 1:
        return PseudocanonicalVerdict(True, 0.0)
    residual = float(np.max(np.abs(f[1:] @ f[0].conj())) / n0)
    return PseudocanonicalVerdict(residual <= tol, residual)


def pseudocanonicalize(lam: CrossSection) -> tuple[ScalarSeries, CrossSection]:
    """Rescale a section by the unique ``h`` making it pseudocanonical with ``h(z0) = 1``.

    With ``g(z) = <lam(z), f_0>`` one takes ``h = ||f_0||^2 / g`` and
    ``mu = h lam``; then ``<mu(z), f_0>`` is constant.
    """
    f0 = lam.coefficients[0]
    n2 = float(np.vdot(f0, f0).real)
    if n2 == 0:
        raise ValueError("f_0 = 0: cannot pseudocanonicalize")
    g = series_inner(lam.series, f0)
    h = series_div(ScalarSeries.constant(n2, g.order, g.center), g)
    mu = series_mul(h, lam.series)
    return h, CrossSection(mu, lam.operator, lam.z0, "pseudocanonical")


def _complete_in_kernel(e1: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Orthonormal basis of span(Q) starting with ``e1``.

    Remaining vectors come from Gram-Schmidt over the projections of
    ``e_0, e_1, ...`` onto the kernel, in index order.
    """
    n = Q.shape[1]
    basis = [e1 / np.linalg.norm(e1)]
    P = Q @ Q.conj().T
    for j in range(Q.shape[0]):
        if len(basis) == n:
            break
        v = P[:, j].copy()
        for _ in range(2):
            for b in basis:
                v -= np.vdot(b, v) * b
        if np.linalg.norm(v) > 1e-6:
            basis.append(v / np.linalg.norm(v))
    if len(basis) < n:
        raise RuntimeError("failed to complete kernel basis")
    return np.column_stack(basis)


@dataclass(frozen=True, eq=False)
class Decomposition:
    """``lam = gamma_1 + sum_{i>=2} g_i gamma_i`` with canonical ``gamma_i``.

    Residuals are taken per coefficient relative to ``max(1, ||lam_k||)``:
    away from the centre of the disc the coefficients grow geometrically and
    only relative agreement is meaningful.  ``reconstruction_abs`` keeps the
    absolute value.
    """

    gamma: list[CrossSection]
    g: list[ScalarSeries]
    reconstruction_residual: float
    delta_residual: float
    reconstruction_abs: float = 0.0

    @property
    def g_at_z0(self) -> float:
        return max((abs(gi[0]) for gi in self.g), default=0.0)


def decompose_pseudocanonical(
    lam: CrossSection,
    T: TruncatedOperator | None = None,
    z0: complex | None = None,
    tol: float = 1e-10,
) -> Decomposition:
    """Split a unit pseudocanonical section into canonical pieces.

    ``gamma_1`` starts at ``lam(z0)``; the other ``gamma_i`` start at a
    deterministic orthonormal completion inside ``ker(T - z0)``, and
    ``g_i = <lam, gamma_i(z0)>``.

    Raises
    ------
    NotPseudocanonicalError
        If ``lam`` fails :func:`pseudocanonical_check` at ``tol``.
    ValueError
        If ``lam(z0)`` is not a unit vector of a nontrivial kernel.
    """
    T = lam.operator if T is None else T
    z0 = lam.z0 if z0 is None else complex(z0)
    if not pseudocanonical_check(lam, tol).passed:
        raise NotPseudocanonicalError("section is not pseudocanonical")
    f = lam.coefficients
    K = lam.order
    if abs(np.linalg.norm(f[0]) - 1.0) > tol:
        raise ValueError("lam(z0) must be normalized to 1")
    Q = kernel_basis(T, z0)
    if Q.dim == 0:
        raise ValueError("ker(T - z0) is trivial")
    Qc = Q.columns
    if np.linalg.norm(f[0] - Qc @ (Qc.conj().T @ f[0])) > np.sqrt(tol):
        raise NotInKernelError("lam(z0) does not lie in ker(T - z0)")
    E = _complete_in_kernel(f[0], Qc)
    inverse = canonical_right_inverse(T, z0)
    gamma = [canonical_section(T, z0, E[:, i], K, inverse=inverse) for i in range(E.shape[1])]
    g = [series_inner(lam.series, E[:, i]) for i in range(1, E.shape[1])]

    recon = gamma[0].series
    for gi, gam in zip(g, gamma[1:]):
        recon = recon + series_mul(gi, gam.series)
    err = np.linalg.norm(f - recon.coefficients, axis=1)
    scale = np.maximum(1.0, np.linalg.norm(f, axis=1))
    reconstruction = float(np.max(err / scale))

    n = E.shape[1]
    delta = 0.0
    for i in range(n):
        for j in range(n):
            c = series_inner(gamma[i].series, E[:, j]).coefficients.copy()
            c[0] -= 1.0 if i == j else 0.0
            gs = np.maximum(1.0, np.linalg.norm(gamma[i].coefficients, axis=1))
            delta = max(delta, float(np.max(np.abs(c) / gs)))
    return Decomposition(gamma, g, reconstruction, delta, float(np.max(err)))


def orthogonality_gap(s: CrossSection) -> float:
    """Distance from ``f_0`` to ``span{f_1, ..., f_K}``."""
    f = s.coefficients
    if f.shape[0] == 1:
        return float(np.linalg.norm(f[0]))
    F1 = f[1:].T
    c, *_ = np.linalg.lstsq(F1, f[0], rcond=None)
    return float(np.linalg.norm(f[0] - F1 @ c))


@dataclass(frozen=True)
class SectionDiagnostics:
    points: np.ndarray
    eigen_residuals: np.ndarray
    residual_bounds: np.ndarray
    radius: float
    recurrence_residual: float
    relative_recurrence_residual: float

    @property
    def eigen_ok(self) -> bool:
        return bool(np.all(self.eigen_residuals <= self.residual_bounds))


def default_grid(z0: complex, radius: float, points: int = 16) -> np.ndarray:
    if not np.isfinite(radius):
        radius = 1.0
    ring = z0 + radius * np.exp(2j * np.pi * np.arange(points) / points)
    return np.concatenate([[z0], z0 + 0.5 * (ring - z0), ring])


def section_diagnostics(
    T: TruncatedOperator, s: CrossSection, z_grid: Sequence[complex] | None = None
) -> SectionDiagnostics:
    """Eigen-relation residuals on a grid, root-test radius, recurrence residual.

    Residuals are taken on the exact rows of ``T``.  The bound reported next
    to each eigen residual is ``||T - z|| * tail_bound(z)``, which dominates
    ``||(T - z) s_K(z)||`` whenever the tail estimate is valid.
    """
    radius = root_test_radius(s.series)
    if z_grid is None:
        z_grid = default_grid(s.z0, 0.5 * radius)
    pts = np.asarray(list(z_grid), dtype=complex)
    W = T.row_window
    f = s.coefficients
    res = np.empty(pts.size)
    bounds = np.empty(pts.size)
    for i, z in enumerate(pts):
        val = series_eval(s.series, z)
        A = (T.entries - z * np.eye(T.N))[:W]
        res[i] = np.linalg.norm(A @ val.value)
        bounds[i] = np.linalg.norm(A, 2) * val.tail_bound
    A0 = _exact_rows(T, s.z0)
    rec = [np.linalg.norm(A0 @ f[0])]
    rel = [rec[0] / max(np.linalg.norm(f[0]), np.finfo(float).tiny)]
    for k in range(1, f.shape[0]):
        r = np.linalg.norm(A0 @ f[k] - f[k - 1][:W])
        rec.append(r)
        nk = np.linalg.norm(f[k - 1])
        rel.append(r / nk if nk > 0 else r)
    return SectionDiagnostics(pts, res, bounds, radius, float(max(rec)), float(max(rel)))
