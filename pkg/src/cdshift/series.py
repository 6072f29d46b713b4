"""Truncated power series with scalar or Hilbert-vector coefficients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import ExactWindow

__all__ = [
    "DEFAULT_ORDER",
    "CenterMismatchError",
    "UnitDivisionError",
    "ScalarSeries",
    "VectorSeries",
    "SeriesValue",
    "series_mul",
    "series_div",
    "series_inner",
    "series_eval",
    "root_test_radius",
]

DEFAULT_ORDER = 40
_EPS = np.finfo(float).eps


class CenterMismatchError(ValueError):
    pass


class UnitDivisionError(ZeroDivisionError):
    """Raised when dividing by a series whose constant term vanishes."""


@dataclass(frozen=True, eq=False)
class ScalarSeries:
    """``sum_k c_k (z - center)^k`` for ``k = 0..order``."""

    coefficients: np.ndarray
    center: complex = 0.0

    def __post_init__(self):
        c = np.atleast_1d(np.array(self.coefficients, dtype=complex))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "center", complex(self.center))

    @classmethod
    def constant(cls, value: complex, order: int, center: complex = 0.0) -> "ScalarSeries":
        c = np.zeros(order + 1, dtype=complex)
        c[0] = value
        return cls(c, center)

    @classmethod
    def polynomial(cls, coeffs, order: int, center: complex = 0.0) -> "ScalarSeries":
        """Zero-pad low-degree coefficients up to ``order``."""
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.size > order + 1:
            raise ValueError("polynomial degree exceeds the requested order")
        c = np.zeros(order + 1, dtype=complex)
        c[: coeffs.size] = coeffs
        return cls(c, center)

    @property
    def order(self) -> int:
        return self.coefficients.size - 1

    def __getitem__(self, k):
        return self.coefficients[k]


@dataclass(frozen=True, eq=False)
class VectorSeries:
    """``sum_k f_k (z - center)^k`` with ``f_k`` stored as rows of a (K+1, N) array."""

    coefficients: np.ndarray
    center: complex = 0.0
    exact_window: ExactWindow | None = None

    def __post_init__(self):
        f = np.array(self.coefficients, dtype=complex)
        if f.ndim != 2 or f.shape[0] == 0:
            raise ValueError("vector coefficients must have shape (order + 1, N)")
        if not np.all(np.isfinite(f)):
            raise ValueError("coefficients must be finite")
        f.setflags(write=False)
        object.__setattr__(self, "coefficients", f)
        object.__setattr__(self, "center", complex(self.center))
        if self.exact_window is None:
            object.__setattr__(self, "exact_window", ExactWindow(f.shape[1]))

    @property
    def order(self) -> int:
        return self.coefficients.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.coefficients.shape[1]

    def __getitem__(self, k):
        return self.coefficients[k]

    def __add__(self, other: "VectorSeries") -> "VectorSeries":
        _check_centers(self, other)
        K = min(self.order, other.order)
        W = min(self.exact_window.rows_valid, other.exact_window.rows_valid)
        return VectorSeries(
            self.coefficients[: K + 1] + other.coefficients[: K + 1], self.center, ExactWindow(W)
        )

    def __sub__(self, other: "VectorSeries") -> "VectorSeries":
        return self + other.scaled(-1.0)

    def scaled(self, c: complex) -> "VectorSeries":
        return VectorSeries(c * self.coefficients, self.center, self.exact_window)


@dataclass(frozen=True)
class SeriesValue:
    """Horner value of a truncated series and a bound on the discarded tail."""

    value: complex | np.ndarray
    tail_bound: float
    radius: float
    out_of_radius: bool


def _check_centers(a, b):
    if a.center != b.center:
        raise CenterMismatchError(f"series centers differ: {a.center} vs {b.center}")


def _norms(s) -> np.ndarray:
    c = s.coefficients
    return np.abs(c) if c.ndim == 1 else np.linalg.norm(c, axis=1)


def series_mul(a: ScalarSeries, b: ScalarSeries | VectorSeries):
    """Cauchy product truncated at ``min(a.order, b.order)``."""
    _check_centers(a, b)
    K = min(a.order, b.order)
    ca = a.coefficients[: K + 1]
    if isinstance(b, ScalarSeries):
        return ScalarSeries(np.convolve(ca, b.coefficients[: K + 1])[: K + 1], a.center)
    fb = b.coefficients[: K + 1]
    out = np.zeros_like(fb)
    for k in range(K + 1):
        out[k] = ca[k::-1] @ fb[: k + 1]
    return VectorSeries(out, a.center, b.exact_window)


def series_div(num: ScalarSeries, den: ScalarSeries, K: int | None = None) -> ScalarSeries:
    """Quotient ``q`` with ``q * den = num`` through order ``K``."""
    _check_centers(num, den)
    if K is None:
        K = min(num.order, den.order)
    if K > min(num.order, den.order):
        raise ValueError("requested order exceeds the available coefficients")
    d = den.coefficients
    if d[0] == 0:
        raise UnitDivisionError("denominator has zero constant term")
    n = num.coefficients
    q = np.zeros(K + 1, dtype=complex)
    for k in range(K + 1):
        q[k] = (n[k] - d[k:0:-1] @ q[:k]) / d[0]
    return ScalarSeries(q, num.center)


def series_inner(lam: VectorSeries, v: np.ndarray) -> ScalarSeries:
    """Scalar series with coefficient ``k`` equal to ``<f_k, v>``.

    The inner product is linear in its first slot, so scaling ``v`` by ``c``
    scales the result by ``conj(c)``.
    """
    v = np.asarray(v, dtype=complex)
    if v.shape != (lam.dim,):
        raise ValueError(f"vector length {v.shape} does not match series dimension {lam.dim}")
    return ScalarSeries(lam.coefficients @ v.conj(), lam.center)


def root_test_radius(s: ScalarSeries | VectorSeries) -> float:
    """Radius of convergence from ``limsup ||c_k||^(1/k)`` over the tail.

    Uses the last ``max(5, K // 4)`` coefficients with ``k >= 1``.
    """
    nrm = _norms(s)
    K = nrm.size - 1
    if K < 1:
        return np.inf
    lo = max(1, K + 1 - max(5, K // 4))
    k = np.arange(lo, K + 1)
    tail = nrm[lo:]
    with np.errstate(divide="ignore"):
        roots = np.where(tail > 0, tail ** (1.0 / k), 0.0)
    r = roots.max()
    return np.inf if r == 0 else float(1.0 / r)


def series_eval(s: ScalarSeries | VectorSeries, z: complex) -> SeriesValue:
    """Horner evaluation with a geometric-majorant bound on the tail.

    The coefficients on the root-test window are dominated by ``C r^k``; the
    discarded tail is then at most ``C q^(K+1) / (1 - q)`` with
    ``q = r |z - center|``.  A small roundoff term is added.  When ``q >= 1``
    the point is flagged as outside the estimated disc and the bound is inf.
    """
    c = s.coefficients
    dz = complex(z) - s.center
    R = root_test_radius(s)
    if dz == 0:
        return SeriesValue(c[0].copy() if c.ndim > 1 else c[0], 0.0, R, False)
    acc = np.zeros_like(c[0])
    for ck in c[::-1]:
        acc = acc * dz + ck
    nrm = _norms(s)
    K = nrm.size - 1
    adz = abs(dz)
    roundoff = 8 * (K + 1) * _EPS * float(np.sum(nrm * adz ** np.arange(K + 1)))
    if np.isinf(R):
        return SeriesValue(acc, roundoff, R, False)
    r = 1.0 / R
    q = r * adz
    if q >= 1.0:
        return SeriesValue(acc, np.inf, R, True)
    lo = max(1, K + 1 - max(5, K // 4))
    k = np.arange(lo, K + 1)
    C = float(np.max(nrm[lo:] / r ** k))
    tail = C * q ** (K + 1) / (1.0 - q)
    return SeriesValue(acc, tail + roundoff, R, False)
