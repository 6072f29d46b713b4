"""Truncated operators on l^2 and the basic questions one can ask of them.

An operator is stored as its N x N matrix in the canonical orthonormal basis
``e_0, ..., e_{N-1}``.  Truncation corrupts the last rows (entries that would
need columns >= N) and the last columns (images that would land in rows >= N),
so every operator carries an upper and a lower bandwidth from which the exact
window is derived.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

__all__ = [
    "DEFAULT_TOL",
    "OperatorSpecError",
    "DegenerateToleranceError",
    "WindowError",
    "TruncatedOperator",
    "ExactWindow",
    "KernelBasis",
    "SurjectivityMargin",
    "SpectralRadiusEstimate",
    "shift_operator",
    "build_operator",
    "parse_complex",
    "adjoint",
    "shifted",
    "operator_power",
    "kernel_basis",
    "surjectivity_margin",
    "spectral_radius_estimate",
]

DEFAULT_TOL = 1e-9

SHIFT_KINDS = (
    "backward_weighted_shift",
    "forward_weighted_shift",
    "block_backward_shift",
    "block_forward_shift",
)
KINDS = SHIFT_KINDS + ("dense",)
_ADJOINT_KIND = {
    "backward_weighted_shift": "forward_weighted_shift",
    "forward_weighted_shift": "backward_weighted_shift",
    "block_backward_shift": "block_forward_shift",
    "block_forward_shift": "block_backward_shift",
    "dense": "dense",
}


class OperatorSpecError(ValueError):
    """Raised for malformed operator-spec documents or invalid shift data."""


class DegenerateToleranceError(ValueError):
    """Raised when a rank cutoff swallows half the space or more."""


class WindowError(ValueError):
    """Raised when truncation leaves no index range to make an assertion on."""


def _detect_bandwidths(entries: np.ndarray, rtol: float = 1e-14) -> tuple[int, int]:
    scale = np.abs(entries).max(initial=0.0)
    if scale == 0.0:
        return 0, 0
    i, j = np.nonzero(np.abs(entries) > rtol * scale)
    return int(max(0, (j - i).max())), int(max(0, (i - j).max()))


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    """An operator on l^2 truncated to its leading N x N block.

    Parameters
    ----------
    entries : ndarray, shape (N, N)
        Complex matrix in the canonical basis.
    kind : str
        One of ``backward_weighted_shift``, ``forward_weighted_shift``,
        ``block_backward_shift``, ``block_forward_shift`` or ``dense``.
    upper_bandwidth, lower_bandwidth : int, optional
        Largest ``j - i`` (resp. ``i - j``) with a nonzero entry in the
        untruncated operator.  Detected from ``entries`` when omitted.  A dense
        operator whose finite-rank part sits away from the truncation edge may
        declare smaller values than the detected ones.
    multiplicity_hint : int, optional
        Expected ``dim ker(T - z)`` on the region of interest.
    weights : ndarray, optional
        Weight sequence ``w_1, ..., w_{N-1}`` of a scalar weighted shift.
    """

    entries: np.ndarray
    kind: str = "dense"
    upper_bandwidth: int | None = None
    lower_bandwidth: int | None = None
    multiplicity_hint: int | None = None
    weights: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise OperatorSpecError(f"entries must be a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise OperatorSpecError("entries must be finite")
        if self.kind not in KINDS:
            raise OperatorSpecError(f"unknown operator kind {self.kind!r}")
        up, lo = _detect_bandwidths(a)
        if self.upper_bandwidth is not None:
            up = int(self.upper_bandwidth)
        if self.lower_bandwidth is not None:
            lo = int(self.lower_bandwidth)
        if self.kind != "dense":
            i, j = np.nonzero(a)
            if i.size and ((j - i).max() > up or (i - j).max() > lo):
                raise OperatorSpecError("nonzero entries outside the declared bandwidth")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "upper_bandwidth", up)
        object.__setattr__(self, "lower_bandwidth", lo)
        if self.weights is not None:
            w = np.array(self.weights, dtype=complex)
            w.setflags(write=False)
            object.__setattr__(self, "weights", w)

    @property
    def N(self) -> int:
        return self.entries.shape[0]

    truncation_order = N

    @property
    def bandwidth(self) -> int:
        return max(self.upper_bandwidth, self.lower_bandwidth)

    @property
    def row_window(self) -> int:
        """Rows whose entries do not depend on columns beyond the truncation."""
        return max(0, self.N - self.upper_bandwidth)

    @property
    def column_window(self) -> int:
        """Columns whose images are not cut off by the truncation."""
        return max(0, self.N - self.lower_bandwidth)

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries, 2))

    def __matmul__(self, other):
        if isinstance(other, TruncatedOperator):
            return TruncatedOperator(
                self.entries @ other.entries,
                upper_bandwidth=min(self.N, self.upper_bandwidth + other.upper_bandwidth),
                lower_bandwidth=min(self.N, self.lower_bandwidth + other.lower_bandwidth),
            )
        return self.entries @ np.asarray(other)

    def __repr__(self):
        return (
            f"TruncatedOperator(kind={self.kind!r}, N={self.N}, "
            f"bandwidth=({self.upper_bandwidth}, {self.lower_bandwidth}))"
        )


@dataclass(frozen=True)
class ExactWindow:
    """Number of leading indices that truncation cannot have touched."""

    rows_valid: int

    def __post_init__(self):
        if self.rows_valid < 0:
            raise WindowError("exact window exhausted")

    def after(self, op: TruncatedOperator | int, times: int = 1) -> "ExactWindow":
        b = op if isinstance(op, int) else op.bandwidth
        left = self.rows_valid - times * b
        if left <= 0:
            raise WindowError(f"exact window exhausted after {times} applications (left {left})")
        return ExactWindow(left)


@dataclass(frozen=True)
class KernelBasis:
    """Orthonormal basis of a numerical kernel ``ker(T - point)``."""

    point: complex
    columns: np.ndarray
    tolerance: float
    singular_values: np.ndarray = field(repr=False)
    residual: float = 0.0

    @property
    def dim(self) -> int:
        return self.columns.shape[1]


@dataclass(frozen=True)
class SurjectivityMargin:
    """Smallest singular value of the exact rows of ``T - z``.

    This is a proxy: surjectivity of the untruncated operator cannot be
    decided from a finite section.
    """

    value: float
    window: int
    indeterminate: bool = False
    proxy: bool = True

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class SpectralRadiusEstimate:
    value: float
    iterations: int
    caveat: str = "power-iteration estimate on a truncation; heuristic for the infinite operator"

    def __float__(self):
        return self.value


def parse_complex(value: Any) -> complex:
    """Accept numbers, ``{"re": .., "im": ..}`` mappings, or ``a+bi`` strings."""
    if isinstance(value, Mapping):
        try:
            return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
        except (TypeError, ValueError) as exc:
            raise OperatorSpecError(f"bad complex literal {value!r}") from exc
    if isinstance(value, str):
        s = value.strip().replace("i", "j")
        if not s or " " in s:
            raise OperatorSpecError(f"bad complex literal {value!r}")
        try:
            return complex(s)
        except ValueError as exc:
            raise OperatorSpecError(f"bad complex literal {value!r}") from exc
    if isinstance(value, bool) or not isinstance(value, (int, float, complex, np.number)):
        raise OperatorSpecError(f"bad complex literal {value!r}")
    return complex(value)


def _extend_weights(weights: Sequence, count: int, periodic: bool) -> np.ndarray:
    w = np.array([parse_complex(x) for x in weights], dtype=complex)
    if w.size == 0:
        raise OperatorSpecError("weights list must be nonempty")
    if np.any(w == 0):
        raise OperatorSpecError("zero weight: the shift would not be surjective")
    if periodic:
        return np.resize(w, count)
    if w.size >= count:
        return w[:count]
    return np.concatenate([w, np.full(count - w.size, w[-1])])


def shift_operator(
    N: int,
    weights: Sequence | float = 1.0,
    *,
    direction: str = "backward",
    multiplicity: int = 1,
    periodic: bool = False,
) -> TruncatedOperator:
    """Weighted backward/forward shift of a given multiplicity.

    The backward shift sends ``e_k`` to ``w_k e_{k-m}`` (``e_k`` to 0 for
    ``k < m``); the forward shift is its adjoint pattern, ``e_k`` to
    ``w_{k+m} e_{k+m}``.  Weights are indexed from 1 and extended by repeating
    the last one unless ``periodic``.
    """
    if N < 2:
        raise OperatorSpecError("truncation order must be at least 2")
    m = int(multiplicity)
    if m < 1 or m >= N:
        raise OperatorSpecError(f"multiplicity must be in [1, N), got {m}")
    if np.isscalar(weights):
        weights = [weights]
    w = _extend_weights(weights, N - m, periodic)
    a = np.zeros((N, N), dtype=complex)
    k = np.arange(m, N)
    a[k - m, k] = w
    block = m > 1
    if direction == "backward":
        kind = "block_backward_shift" if block else "backward_weighted_shift"
        return TruncatedOperator(a, kind, m, 0, multiplicity_hint=m, weights=w)
    if direction == "forward":
        kind = "block_forward_shift" if block else "forward_weighted_shift"
        return TruncatedOperator(a.T.copy(), kind, 0, m, weights=w)
    raise OperatorSpecError(f"direction must be 'backward' or 'forward', got {direction!r}")


def build_operator(spec: Mapping[str, Any], N: int | None = None) -> TruncatedOperator:
    """Realize an operator-spec document as a truncated matrix.

    ``N`` overrides the document's ``truncation`` field.
    """
    if not isinstance(spec, Mapping):
        raise OperatorSpecError("operator spec must be a JSON object")
    kind = spec.get("kind")
    if N is None:
        N = spec.get("truncation")
    if kind != "dense":
        if isinstance(N, bool) or not isinstance(N, int):
            raise OperatorSpecError("'truncation' must be an integer")
        if N < 2:
            raise OperatorSpecError("truncation order must be at least 2")

    if kind in ("backward_weighted_shift", "forward_weighted_shift", "block_backward_shift"):
        weights = spec.get("weights", [1.0] if kind == "block_backward_shift" else None)
        if not isinstance(weights, list) or not weights:
            raise OperatorSpecError("shift kinds need a nonempty 'weights' list")
        periodic = spec.get("extend", "last") == "periodic"
        multiplicity = 1
        if kind == "block_backward_shift":
            multiplicity = spec.get("multiplicity")
            if isinstance(multiplicity, bool) or not isinstance(multiplicity, int):
                raise OperatorSpecError("block_backward_shift needs an integer 'multiplicity'")
        direction = "forward" if kind == "forward_weighted_shift" else "backward"
        return shift_operator(
            N, weights, direction=direction, multiplicity=multiplicity, periodic=periodic
        )

    if kind == "dense":
        rows = spec.get("matrix")
        if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
            raise OperatorSpecError("dense kind needs a 'matrix' list of rows")
        if any(len(r) != len(rows) for r in rows):
            raise OperatorSpecError("dense 'matrix' must be square")
        a = np.array([[parse_complex(x) for x in r] for r in rows], dtype=complex)
        if N is not None and N != a.shape[0]:
            if isinstance(N, bool) or not isinstance(N, int) or N < a.shape[0]:
                raise OperatorSpecError("'truncation' smaller than the dense matrix")
            padded = np.zeros((N, N), dtype=complex)
            padded[: a.shape[0], : a.shape[0]] = a
            a = padded
        return TruncatedOperator(a, "dense")

    if kind == "named_example":
        from .basis import build_named_example

        example = spec.get("example")
        params = spec.get("params", {}) or {}
        if not isinstance(params, Mapping):
            raise OperatorSpecError("'params' must be an object")
        try:
            return build_named_example(example, params, N).T
        except ValueError as exc:
            raise OperatorSpecError(str(exc)) from exc

    raise OperatorSpecError(f"unknown operator kind {kind!r}")


def adjoint(T: TruncatedOperator) -> TruncatedOperator:
    w = None if T.weights is None else np.conj(T.weights)
    return TruncatedOperator(
        T.entries.conj().T,
        _ADJOINT_KIND[T.kind],
        T.lower_bandwidth,
        T.upper_bandwidth,
        multiplicity_hint=None,
        weights=w,
    )


def shifted(T: TruncatedOperator, z: complex) -> TruncatedOperator:
    """``T - z I`` with the same bandwidths."""
    return TruncatedOperator(
        T.entries - z * np.eye(T.N),
        "dense",
        T.upper_bandwidth,
        T.lower_bandwidth,
        multiplicity_hint=T.multiplicity_hint,
    )


def operator_power(T: TruncatedOperator, k: int) -> TruncatedOperator:
    if k < 0:
        raise ValueError("power must be nonnegative")
    return TruncatedOperator(
        np.linalg.matrix_power(T.entries, k),
        "dense",
        min(T.N, k * T.upper_bandwidth),
        min(T.N, k * T.lower_bandwidth),
    )


def _window_block(T: TruncatedOperator, z: complex) -> np.ndarray:
    A = T.entries - z * np.eye(T.N)
    return A[: T.row_window, : T.column_window]


def kernel_basis(
    T: TruncatedOperator, z: complex = 0.0, tol: float = DEFAULT_TOL, *, guard: bool = True
) -> KernelBasis:
    """Orthonormal basis of the numerical null space of ``T - z``.

    Only the exact rows and columns enter the SVD; singular values at or
    below ``tol * sigma_max`` count as zero.  Returned columns have length N
    (zero beyond the column window).  With ``guard`` set, a kernel of
    dimension ``>= N/2`` is treated as a sign of a bad tolerance.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    N = T.N
    A = _window_block(T, z)
    r, c = A.shape
    if c == 0:
        raise WindowError("no exact columns left to search for a kernel")
    if r:
        _, s, vh = np.linalg.svd(A, full_matrices=True)
    else:
        s, vh = np.zeros(0), np.eye(c, dtype=complex)
    smax = s[0] if s.size else 0.0
    rank = int(np.count_nonzero(s > tol * smax)) if smax > 0 else 0
    null = vh[rank:].conj().T
    m = null.shape[1]
    if guard and m > 0 and m >= N / 2:
        raise DegenerateToleranceError(
            f"tolerance {tol:g} leaves a {m}-dimensional kernel in dimension {N}"
        )
    Q = np.zeros((N, m), dtype=complex)
    Q[:c] = null
    res = float(np.linalg.norm(A @ null, 2)) if m and r else 0.0
    return KernelBasis(complex(z), Q, float(tol), s, res)


def surjectivity_margin(T: TruncatedOperator, z: complex = 0.0) -> SurjectivityMargin:
    W = T.row_window
    if W == 0:
        return SurjectivityMargin(float("nan"), 0, indeterminate=True)
    A = (T.entries - z * np.eye(T.N))[:W]
    s = np.linalg.svd(A, compute_uv=False)
    value = float(s[-1]) if s.size >= W else 0.0
    return SurjectivityMargin(value, W)


def spectral_radius_estimate(T: TruncatedOperator, iterations: int = 100) -> SpectralRadiusEstimate:
    """Gelfand-style estimate ``||T^k x||^(1/k)`` from a fixed start vector.

    On a truncation this is a heuristic lower bound: a truncated backward
    shift is nilpotent even though the shift itself has spectral radius 1.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    x = np.ones(T.N, dtype=complex) / np.sqrt(T.N)
    log_norm = 0.0
    for _ in range(iterations):
        x = T.entries @ x
        nrm = np.linalg.norm(x)
        if nrm == 0.0:
            return SpectralRadiusEstimate(0.0, iterations)
        log_norm += np.log(nrm)
        x /= nrm
    return SpectralRadiusEstimate(float(np.exp(log_norm / iterations)), iterations)
