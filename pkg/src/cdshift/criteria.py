"""Operator-level criteria: kernel-power spanning, B_1 on a disc, shift on an ONB,
and the multiplicity >= 2 obstruction to being a shift on a Markushevich basis.

Every check returns a :class:`CriterionReport` whose verdict can be recomputed
from the stored residuals and tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .basis import BiorthogonalSystem, biorthogonal_dual, verify_biorthogonal, verify_shift_relation
from .inverse import canonical_right_inverse
from .operators import (
    DEFAULT_TOL,
    DegenerateToleranceError,
    TruncatedOperator,
    WindowError,
    adjoint,
    kernel_basis,
    operator_power,
    shift_operator,
    shifted,
    spectral_radius_estimate,
    surjectivity_margin,
)

__all__ = [
    "VERDICT_TOL",
    "CriterionReport",
    "check_kernel_powers_span",
    "disk_grid",
    "check_b1_disk",
    "check_onb_weighted_shift",
    "check_onb_plain_shift",
    "check_markushevich_shift",
    "demo_no_mbasis_shift",
    "default_epsilon",
    "perturbed_chain_operator",
    "coherence_test_set",
]

VERDICT_TOL = 1e-8
PASS, FAIL, INDETERMINATE, NOT_APPLICABLE = "pass", "fail", "indeterminate", "not_applicable"


@dataclass
class CriterionReport:
    name: str
    verdict: str
    z0: complex = 0.0
    tol: float = VERDICT_TOL
    residuals: dict[str, Any] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "verdict": self.verdict,
            "z0": _jsonable(self.z0),
            "tol": self.tol,
            "residuals": _jsonable(self.residuals),
            "details": _jsonable(self.details),
        }


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    return x


def check_kernel_powers_span(
    A: TruncatedOperator, K: int = 20, tol: float = VERDICT_TOL, probes: int | None = None
) -> CriterionReport:
    """``dim ker A^k`` for ``k = 1..K`` and how well ``ker A^k`` captures ``e_0..e_{probes-1}``.

    Passes when the kernels are nontrivial, grow by the same amount at every
    step, and the probe defects at ``k = K`` are below ``tol``.  ``probes``
    defaults to ``K // 4`` so that each probe index has many powers to be
    absorbed by the growing kernels.

    Raises
    ------
    WindowError
        If ``A^K`` has no exact rows left.
    """
    dims, defects = [], []
    if probes is None:
        probes = max(1, K // 4)
    E = np.eye(A.N, min(probes, A.N), dtype=complex)
    for k in range(1, K + 1):
        Ak = operator_power(A, k)
        if Ak.row_window == 0 or Ak.column_window == 0:
            raise WindowError(f"exact window exhausted at power {k} (N={A.N})")
        Q = kernel_basis(Ak, 0.0, DEFAULT_TOL, guard=False).columns
        dims.append(Q.shape[1])
        d = np.linalg.norm(E - Q @ (Q.conj().T @ E), axis=0) if Q.shape[1] else np.ones(E.shape[1])
        defects.append(d)
    defects = np.array(defects)
    n = dims[0]
    linear = all(d == n * (k + 1) for k, d in enumerate(dims))
    final = float(defects[-1].max())
    verdict = PASS if (n >= 1 and linear and final <= tol) else FAIL
    return CriterionReport(
        "kernel_powers_span",
        verdict,
        tol=tol,
        residuals={"final_probe_defect": final},
        details={"dims": dims, "defect_trend": defects.max(axis=1), "probe_defects": defects},
    )


def disk_grid(epsilon: float, rings: int = 4) -> np.ndarray:
    """Center plus ``rings`` concentric rings strictly inside the disc; ring r has 8r points."""
    pts = [0j]
    for r in range(1, rings + 1):
        rad = epsilon * r / (rings + 1)
        m = 8 * r
        pts.extend(rad * np.exp(2j * np.pi * (np.arange(m) + 0.5 * (r % 2)) / m))
    return np.array(pts)


def check_b1_disk(
    A: TruncatedOperator,
    epsilon: float,
    rings: int = 4,
    tol: float = VERDICT_TOL,
    tail_tol: float = 1e-6,
) -> CriterionReport:
    """Sampled test of ``A in B_1(D_epsilon)``: one-dimensional kernels and positive margins.

    A kernel vector whose last quarter (within the exact columns) carries
    more than ``tail_tol`` of its norm is not resolved by the truncation;
    such points make the verdict indeterminate unless another point fails.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    pts = disk_grid(epsilon, rings)
    scale = max(A.norm(), 1.0)
    Wc = A.column_window
    dims, margins, tails = [], [], []
    failed = unresolved = False
    for z in pts:
        try:
            kb = kernel_basis(A, z)
            m = kb.dim
        except DegenerateToleranceError:
            m = -1
        margin = surjectivity_margin(A, z)
        tail = 0.0
        if m == 1:
            x = kb.columns[:Wc, 0]
            tail = float(np.linalg.norm(x[Wc - Wc // 4:]))
        dims.append(m)
        margins.append(margin.value)
        tails.append(tail)
        if margin.indeterminate:
            unresolved = True
        elif m != 1 or margin.value <= tol * scale:
            failed = True
        elif tail > tail_tol:
            unresolved = True
    verdict = FAIL if failed else INDETERMINATE if unresolved else PASS
    return CriterionReport(
        "b1_disk",
        verdict,
        tol=tol,
        residuals={"min_margin": float(np.nanmin(margins)), "max_tail_mass": float(max(tails))},
        details={"epsilon": epsilon, "sample_points": pts, "kernel_dims": dims, "margins": margins},
    )


def default_epsilon(T: TruncatedOperator, z0: complex = 0.0) -> float:
    """Half of ``1 / r(T - z0)``, with the radius estimated before truncation nilpotency sets in."""
    r = spectral_radius_estimate(shifted(T, z0), iterations=max(1, T.N // 4)).value
    return 0.5 / r if r > 0 else 0.5


def _chain(T, z0, K, tol):
    kb = kernel_basis(T, z0)
    if kb.dim != 1:
        return kb, None, None
    inv = canonical_right_inverse(T, z0)
    B = inv.B.entries
    f = np.empty((K + 1, T.N), dtype=complex)
    f[0] = kb.columns[:, 0]
    for k in range(1, K + 1):
        f[k] = B @ f[k - 1]
    return kb, inv, f


def check_onb_weighted_shift(
    T: TruncatedOperator, z0: complex = 0.0, K: int = 20, tol: float = VERDICT_TOL
) -> CriterionReport:
    """Is ``M_k = B^k ker(T - z0)`` invariant for ``B*B`` for ``k <= K``?

    Residual ``k`` is the part of ``B*B f_k`` orthogonal to the unit vector
    ``f_k``.  Only defined for a one-dimensional kernel.
    """
    kb = kernel_basis(T, z0)
    if kb.dim != 1:
        return CriterionReport(
            "onb_weighted_shift", NOT_APPLICABLE, complex(z0), tol,
            details={"kernel_dim": kb.dim, "reason": "criterion is stated for dim ker(T - z0) = 1"},
        )
    W = T.N - (K + 2) * T.bandwidth
    if W <= 0:
        raise WindowError(f"K={K} exhausts the exact window of a truncation of order {T.N}")
    _, inv, f = _chain(T, z0, K, tol)
    B = inv.B.entries
    M = B.conj().T @ B
    res, eig = [], []
    for fk in f:
        u = fk / np.linalg.norm(fk)
        v = M @ u
        lam = np.vdot(u, v)
        res.append(float(np.linalg.norm((v - lam * u)[:W])))
        eig.append(lam.real)
    worst = max(res)
    return CriterionReport(
        "onb_weighted_shift",
        PASS if worst <= tol else FAIL,
        complex(z0),
        tol,
        residuals={"max_invariance_residual": worst, "invariance_residuals": res},
        details={"eigenvalues": eig, "window": W, "kernel_dim": 1},
    )


def check_onb_plain_shift(T: TruncatedOperator, z0: complex = 0.0, tol: float = VERDICT_TOL) -> CriterionReport:
    """``||B*B - I||`` on the exact window; passes when ``B`` is an isometry there.

    Raises
    ------
    NotSurjectiveError
        If ``T - z0`` is not surjective.
    """
    inv = canonical_right_inverse(T, z0)
    W = T.N - 2 * T.bandwidth
    if W <= 0:
        raise WindowError(f"no exact window for B*B at N={T.N}")
    B = inv.B.entries
    D = (B.conj().T @ B)[:W, :W] - np.eye(W)
    dev = float(np.linalg.norm(D, 2))
    return CriterionReport(
        "onb_plain_shift",
        PASS if dev <= tol else FAIL,
        complex(z0),
        tol,
        residuals={"isometry_deviation": dev},
        details={"window": W},
    )


def check_markushevich_shift(
    T: TruncatedOperator,
    z0: complex = 0.0,
    K: int = 20,
    epsilon: float | None = None,
    tol: float = VERDICT_TOL,
) -> dict[str, CriterionReport]:
    """The three equivalent conditions for ``T - z0`` to be a shift on an orthogonal-tailed M-basis.

    ``kernel_powers``: ``ker (B*)^k`` span the space.  ``chain``: constructive
    evidence from ``f_k = B^k f_0`` (``f_0`` orthogonal to the tail, ``B*``
    acting as a backward shift on the minimal-norm dual); it can only support,
    never refute, the existence statement.  ``b1_disk``: ``B*`` in
    ``B_1(D_epsilon)``.  All three are not applicable unless the kernel at
    ``z0`` is one-dimensional.
    """
    kb = kernel_basis(T, z0)
    if kb.dim != 1:
        na = {"kernel_dim": kb.dim, "reason": "criterion is stated for dim ker(T - z0) = 1"}
        return {
            key: CriterionReport(f"markushevich_{key}", NOT_APPLICABLE, complex(z0), tol, details=dict(na))
            for key in ("kernel_powers", "chain", "b1_disk")
        }
    inv = canonical_right_inverse(T, z0)
    Bs = adjoint(inv.B)
    if epsilon is None:
        epsilon = default_epsilon(T, z0)

    cond1 = check_kernel_powers_span(Bs, K, tol)
    cond1.name, cond1.z0 = "markushevich_kernel_powers", complex(z0)

    cond3 = check_b1_disk(Bs, epsilon, tol=tol)
    cond3.name, cond3.z0 = "markushevich_b1_disk", complex(z0)

    _, _, f = _chain(T, z0, K, tol)
    orth = float(np.max(np.abs(f[1:] @ f[0].conj())))
    g = biorthogonal_dual(f)
    half = K // 2
    gn = np.linalg.norm(g[: half + 1], axis=1)
    rel = verify_shift_relation(Bs, 0.0, g[: half + 1], "backward", 1).residuals / gn
    chain_res = max(orth, float(rel.max()))
    cond2 = CriterionReport(
        "markushevich_chain",
        PASS if chain_res <= tol else FAIL,
        complex(z0),
        tol,
        residuals={"tail_orthogonality": orth, "dual_backward_shift": float(rel.max())},
        details={"evidence": "one-directional: constructed chain f_k = B^k f_0", "checked_k": half},
    )
    return {"kernel_powers": cond1, "chain": cond2, "b1_disk": cond3}


def demo_no_mbasis_shift(
    T: TruncatedOperator,
    z0: complex,
    chain: BiorthogonalSystem,
    tol: float = 1e-10,
    pre_tol: float = VERDICT_TOL,
) -> CriterionReport:
    """Witness that a backward-shift chain cannot be a Markushevich basis when ``dim ker >= 2``.

    Picks a unit ``x`` in ``ker(T - z0)`` with ``<x, g_0> = 0`` and reports
    ``max_k |<x, g_k>|``; if every pairing vanishes, ``{g_k}`` is not total.
    """
    kb = kernel_basis(T, z0)
    if kb.dim < 2:
        return CriterionReport(
            "no_mbasis_shift", NOT_APPLICABLE, complex(z0), tol,
            details={"kernel_dim": kb.dim, "reason": "obstruction needs dim ker(T - z0) >= 2"},
        )
    shift = verify_shift_relation(T, z0, chain.f, "backward", 1).max_residual
    bio = verify_biorthogonal(chain.f, chain.g).residual
    if shift > pre_tol or bio > pre_tol:
        raise ValueError(
            f"chain is not a biorthogonal backward-shift chain (shift {shift:.2e}, delta {bio:.2e})"
        )
    Q = kb.columns
    row = chain.g[0].conj() @ Q  # <Q c, g_0> = row @ c
    _, _, vh = np.linalg.svd(row[None, :])
    c = vh[-1].conj()
    x = Q @ c
    x /= np.linalg.norm(x)
    pairings = chain.g.conj() @ x
    mags = np.abs(pairings)
    bound = abs(z0) + T.norm()
    growth = float(max((mags[k + 1] - bound * mags[k] for k in range(len(mags) - 1)), default=0.0))
    worst = float(mags.max())
    return CriterionReport(
        "no_mbasis_shift",
        PASS if worst <= tol else FAIL,
        complex(z0),
        tol,
        residuals={"max_pairing": worst, "pairing_with_g0": float(mags[0]), "growth_excess": growth},
        details={"kernel_dim": kb.dim, "witness": x, "pairings": mags},
    )


def perturbed_chain_operator(N: int = 64, c: float = 0.3) -> TruncatedOperator:
    """``S* - c e_0 (x) e_2*``: one-dimensional kernel, but not a weighted shift on any ONB.

    The perturbation lives in the top-left corner, so the truncation edge
    still has the unit upper bandwidth of ``S*``.
    """
    a = shift_operator(N, 1.0).entries.copy()
    a[0, 2] -= c
    return TruncatedOperator(a, "dense", upper_bandwidth=1, lower_bandwidth=0, multiplicity_hint=1)


def coherence_test_set(N: int = 64) -> dict[str, TruncatedOperator]:
    k = np.arange(1, N)
    return {
        "backward_shift": shift_operator(N, 1.0),
        "weights_2": shift_operator(N, 2.0),
        "weights_1_plus_1_over_k_plus_1": shift_operator(N, list(1.0 + 1.0 / (k + 1))),
        "perturbed_chain": perturbed_chain_operator(N),
        "block_shift_2": shift_operator(N, 1.0, multiplicity=2),
    }
