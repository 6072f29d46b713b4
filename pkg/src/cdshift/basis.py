"""Biorthogonal systems, shift relations and the worked examples.

Vector families are passed as 2-d arrays whose rows are the vectors
(``f[k]`` is ``f_k``), or as anything ``np.asarray`` turns into one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .operators import DEFAULT_TOL, TruncatedOperator, shift_operator

__all__ = [
    "NonMinimalFamilyError",
    "BiorthogonalSystem",
    "BiorthogonalCheck",
    "ShiftRelationCheck",
    "BasisDiagnostics",
    "NamedExample",
    "biorthogonal_dual",
    "verify_biorthogonal",
    "verify_shift_relation",
    "basis_diagnostics",
    "build_named_example",
    "default_alpha",
    "example_45_vectors",
]


class NonMinimalFamilyError(ValueError):
    """Raised when a family has a (numerically) singular Gram matrix."""


def _rows(x) -> np.ndarray:
    a = np.asarray(x, dtype=complex)
    if a.ndim != 2:
        raise ValueError("expected a 2-d array of row vectors")
    return a


@dataclass(frozen=True, eq=False)
class BiorthogonalSystem:
    f: np.ndarray
    g: np.ndarray
    delta_residual: float

    @property
    def count(self) -> int:
        return self.f.shape[0]

    @classmethod
    def from_pair(cls, f, g) -> "BiorthogonalSystem":
        f, g = _rows(f), _rows(g)
        return cls(f, g, verify_biorthogonal(f, g).residual)


@dataclass(frozen=True)
class BiorthogonalCheck:
    residual: float
    worst_pair: tuple[int, int]
    worst_value: complex
    tol: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol


def biorthogonal_dual(f, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Minimal-norm dual family inside ``span{f}``.

    With ``F = QR`` (columns ``f_k``) the dual is ``Q R^{-*}``, i.e.
    ``g_j = sum_i (G^{-1})_{ij} f_i`` for the Gram matrix ``G``.  Columns are
    normalized before judging the condition number so that geometric scaling
    of a chain does not count as degeneracy.

    Raises
    ------
    NonMinimalFamilyError
        If the normalized Gram matrix has condition number above ``1 / tol``.
    """
    f = _rows(f)
    norms = np.linalg.norm(f, axis=1)
    if np.any(norms == 0):
        raise NonMinimalFamilyError("family contains a zero vector")
    F = (f / norms[:, None]).T
    if F.shape[1] > F.shape[0]:
        raise NonMinimalFamilyError("more vectors than dimensions")
    Q, R = np.linalg.qr(F)
    s = np.linalg.svd(R, compute_uv=False)
    if s[-1] == 0 or (s[0] / s[-1]) ** 2 > 1.0 / tol:
        raise NonMinimalFamilyError("Gram matrix is numerically singular")
    # g = Q R^{-*}, then undo the column normalization
    G = np.linalg.solve(R, Q.conj().T).conj().T
    return (G / norms[None, :]).T


def verify_biorthogonal(f, g, tol: float = 1e-12) -> BiorthogonalCheck:
    """Exact residual ``max_{i,j} |<f_i, g_j> - delta_ij|`` and its location.

    Ties are broken by the lowest dual index ``j`` first, then the lowest ``i``,
    so the reported pair is the first failing dual in the sequence.
    """
    f, g = _rows(f), _rows(g)
    if f.shape != g.shape:
        raise ValueError(f"families differ in shape: {f.shape} vs {g.shape}")
    P = f @ g.conj().T  # P[i, j] = <f_i, g_j>
    D = P - np.eye(P.shape[0])
    j, i = np.unravel_index(int(np.argmax(np.abs(D.T))), D.T.shape)
    return BiorthogonalCheck(float(np.abs(D[i, j])), (int(i), int(j)), complex(P[i, j]), tol)


@dataclass(frozen=True)
class ShiftRelationCheck:
    residuals: np.ndarray
    direction: str
    step: int

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max(initial=0.0))


def verify_shift_relation(
    T: TruncatedOperator,
    z0: complex,
    seq,
    direction: str = "backward",
    step: int = 1,
    rows: int | None = None,
) -> ShiftRelationCheck:
    """Residuals of a shift relation for ``A = T - z0`` on a sequence.

    backward: ``||A f_k - f_{k-step}||`` for ``k >= step`` and ``||A f_j||``
    for ``j < step``.  forward: ``||A f_k - f_{k+step}||`` for every ``k`` with
    a successor in the sequence.  Norms are taken on the exact rows of ``T``
    (or the first ``rows`` indices).
    """
    f = _rows(seq)
    if step < 1:
        raise ValueError("step must be a positive integer")
    W = T.row_window if rows is None else min(rows, T.row_window)
    A = (T.entries - z0 * np.eye(T.N))[:W]
    img = f @ A.T  # img[k] = A f_k
    if direction == "backward":
        target = np.zeros_like(img)
        target[step:] = f[: max(0, f.shape[0] - step), :W]
        res = np.linalg.norm(img - target, axis=1)
    elif direction == "forward":
        res = np.linalg.norm(img[: max(0, f.shape[0] - step)] - f[step:, :W], axis=1)
    else:
        raise ValueError(f"direction must be 'backward' or 'forward', got {direction!r}")
    return ShiftRelationCheck(res, direction, step)


@dataclass(frozen=True)
class BasisDiagnostics:
    """Truncation estimates of minimality and completeness.

    ``minimality_margins[j]`` is the distance of ``f_j`` to the span of the
    other vectors; ``completeness_defects[j]`` is the distance of ``e_j`` to
    ``span{f}``.  Neither proves anything about the infinite family.
    """

    minimality_margins: np.ndarray
    completeness_defects: np.ndarray
    probe_defects: np.ndarray = field(default_factory=lambda: np.zeros(0))
    window: int = 0


def _distance_to_span(M: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Distances of the columns of ``v`` to the column span of ``M``."""
    if M.shape[1] == 0:
        return np.linalg.norm(v, axis=0)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    r = int(np.count_nonzero(s > s[0] * max(M.shape) * np.finfo(float).eps)) if s.size else 0
    U = U[:, :r]
    return np.linalg.norm(v - U @ (U.conj().T @ v), axis=0)


def basis_diagnostics(f, window: int | None = None, probes=None) -> BasisDiagnostics:
    """Per-vector minimality margins and per-index completeness defects.

    Parameters
    ----------
    f : array_like, shape (K+1, N)
        The family, one vector per row.
    window : int, optional
        Number of leading canonical vectors ``e_j`` to probe; default N.
    probes : array_like, shape (p, N), optional
        Extra vectors whose distance to ``span{f}`` is reported.
    """
    f = _rows(f)
    n, N = f.shape
    F = f.T
    margins = np.empty(n)
    for j in range(n):
        others = np.delete(F, j, axis=1)
        margins[j] = _distance_to_span(others, F[:, [j]])[0]
    W = N if window is None else min(window, N)
    defects = _distance_to_span(F, np.eye(N, W, dtype=complex))
    pd = np.zeros(0)
    if probes is not None:
        p = _rows(probes)
        pd = _distance_to_span(F, p.T)
    return BasisDiagnostics(margins, defects, pd, W)


# -- worked examples --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NamedExample:
    """Materialized example.

    ``T`` acts as a backward shift (step ``step``) on ``g``; its adjoint acts
    as a forward shift on ``f``.  Index 0 of ``f``/``g`` is the first vector of
    the example (``f_1`` in 1-based labels).
    """

    name: str
    T: TruncatedOperator
    f: np.ndarray
    g: np.ndarray
    step: int
    metadata: dict[str, Any]


def default_alpha(count: int) -> np.ndarray:
    """``alpha_n = 1 / (n log(n + 1))`` for ``n = 1..count``."""
    n = np.arange(1, count + 1, dtype=float)
    return 1.0 / (n * np.log(n + 1.0))


def example_45_vectors(alpha: np.ndarray, N: int) -> dict[str, np.ndarray]:
    """The families of the conditional-basis example, truncated to C^N.

    1-based labels: ``f_{2n-1} = e_{2n-1} + sum_{i>=n} alpha_{i-n+1} e_{2i}``,
    ``f_{2n} = e_{2n}``, ``g_{2n-1} = e_{2n-1}``, and two versions of
    ``g_{2n}``: the infinite-sum form as printed and the finite-sum form
    ``e_{2n} - sum_{i=1}^{n} alpha_{n-i+1} e_{2i-1}``.
    """
    if alpha.size < N:
        raise ValueError(f"need at least {N} alpha values, got {alpha.size}")

    def e(label):  # 1-based label -> 0-based index
        return label - 1

    f = np.zeros((N, N), dtype=complex)
    g = np.zeros((N, N), dtype=complex)
    g_printed = np.zeros((N, N), dtype=complex)
    for lab in range(1, N + 1):
        row = lab - 1
        if lab % 2:  # odd label 2n-1
            n = (lab + 1) // 2
            f[row, e(lab)] = 1.0
            for i in range(n, N // 2 + 1):
                if 2 * i <= N:
                    f[row, e(2 * i)] += alpha[i - n]
            g[row, e(lab)] = 1.0
            g_printed[row, e(lab)] = 1.0
        else:  # even label 2n
            n = lab // 2
            f[row, e(lab)] = 1.0
            g[row, e(lab)] = 1.0
            for i in range(1, n + 1):
                g[row, e(2 * i - 1)] -= alpha[n - i]
            g_printed[row, e(lab)] = 1.0
            for i in range(n, (N + 1) // 2 + 1):
                if 2 * i - 1 <= N:
                    g_printed[row, e(2 * i - 1)] -= alpha[i - n]
    return {"f": f, "g": g, "g_printed": g_printed}


def _alpha_from_params(params: Mapping[str, Any], count: int) -> tuple[np.ndarray, str]:
    spec = params.get("alpha", "default") if params else "default"
    if spec == "default":
        return default_alpha(count), "default"
    if not isinstance(spec, (list, tuple)) or not spec:
        raise ValueError("alpha must be 'default' or a nonempty list of positive numbers")
    a = np.asarray(spec, dtype=float)
    if not np.all(np.isfinite(a)) or np.any(a <= 0):
        raise ValueError("alpha must be positive")
    if a.size < count:
        # extend the supplied prefix with the default tail
        return np.concatenate([a, default_alpha(count)[a.size:]]), f"custom[{a.size}]+default"
    return a[:count], "custom"


def build_named_example(name: str, params: Mapping[str, Any] | None = None, N: int | None = 8) -> NamedExample:
    """Materialize ``"4.2"``, ``"4.5"`` or ``"shift_onb"`` at truncation ``N``.

    ``"4.2"``: ``f_n = e_n - e_{n+1}``, ``g_n = e_1 + ... + e_n`` for
    ``n = 1..N-1`` with ``T = S*``.
    ``"4.5"``: the conditional-basis pair with ``T = (S*)^2``; ``g`` is the
    finite-sum dual and the printed infinite-sum dual is kept in the metadata
    together with its failing pair.
    ``"shift_onb"``: ``f = g = e_0..e_{N-1}`` with ``T = S*``.
    """
    params = params or {}
    if N is None:
        N = 8
    if isinstance(N, bool) or not isinstance(N, int) or N < 3:
        raise ValueError("named examples need an integer truncation N >= 3")
    name = str(name)
    if name == "4.2":
        K = N - 1
        f = np.zeros((K, N), dtype=complex)
        g = np.zeros((K, N), dtype=complex)
        for n in range(K):
            f[n, n] = 1.0
            f[n, n + 1] = -1.0
            g[n, : n + 1] = 1.0
        T = shift_operator(N, 1.0)
        return NamedExample(name, T, f, g, 1, {"labels": "1-based: row n-1 holds f_n, g_n"})

    if name == "4.5":
        alpha, source = _alpha_from_params(params, N)
        vec = example_45_vectors(alpha, N)
        printed = verify_biorthogonal(vec["f"], vec["g_printed"])
        corrected = verify_biorthogonal(vec["f"], vec["g"])
        i, j = printed.worst_pair
        n = np.arange(1, N + 1)
        meta = {
            "alpha_source": source,
            "alpha_head": alpha[:4].tolist(),
            "partial_sum_n_alpha_sq": float(np.sum(n * alpha**2)),
            "partial_sum_alpha": float(np.sum(alpha)),
            "printed_dual_residual": printed.residual,
            "printed_dual_failing_pair": [int(i + 1), int(j + 1)],
            "printed_dual_failing_value": printed.worst_value,
            "corrected_dual_residual": corrected.residual,
            "dual_discrepancy": printed.residual > 1e-12,
            "g_printed": vec["g_printed"],
        }
        T = shift_operator(N, 1.0, multiplicity=2)
        return NamedExample(name, T, vec["f"], vec["g"], 2, meta)

    if name == "shift_onb":
        I = np.eye(N, dtype=complex)
        return NamedExample(name, shift_operator(N, 1.0), I, I.copy(), 1, {})

    raise ValueError(f"unknown named example {name!r}; expected '4.2', '4.5' or 'shift_onb'")
