"""Acceptance suite: one test per criterion, each at its stated tolerance."""

import json

import numpy as np

from cdshift.basis import (
    BiorthogonalSystem,
    biorthogonal_dual,
    build_named_example,
    verify_biorthogonal,
    verify_shift_relation,
)
from cdshift.cli import main
from cdshift.criteria import (
    check_markushevich_shift,
    check_onb_plain_shift,
    check_onb_weighted_shift,
    coherence_test_set,
    demo_no_mbasis_shift,
    perturbed_chain_operator,
)
from cdshift.inverse import canonical_right_inverse
from cdshift.operators import adjoint, kernel_basis, shift_operator
from cdshift.sections import (
    canonical_section,
    canonical_tuple,
    decompose_pseudocanonical,
    orthogonality_gap,
    pseudocanonical_check,
    pseudocanonicalize,
    relate_tuples,
    section_diagnostics,
    section_from_coefficients,
)
from cdshift.series import ScalarSeries, root_test_radius, series_div, series_eval, series_mul

SEED = 20240611


def _e(N, k):
    v = np.zeros(N, dtype=complex)
    v[k] = 1.0
    return v


def _random_unitary(rng, n):
    Z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def test_01_canonical_inverse_exactness(criterion):
    N = 128
    T = shift_operator(N, 1.0)
    inv = canonical_right_inverse(T, 0.0)
    S = np.diag(np.ones(N - 1), -1)
    entry_err = float(np.max(np.abs(inv.B.entries - S)))
    W = inv.window
    right = float(np.linalg.norm(T.entries[:W] @ inv.B.entries[:, :W] - np.eye(W), 2))
    criterion(1, "canonical inverse exactness", entry_err <= 1e-14 and right <= 1e-12,
              f"max|B - S| = {entry_err:.1e}, ||TB - I|| = {right:.1e}")


def test_02_canonical_section_of_backward_shift(criterion):
    N, K = 128, 40
    T = shift_operator(N, 1.0)
    s = canonical_section(T, 0.0, _e(N, 0), K)
    exact = bool(np.array_equal(s.coefficients, np.eye(K + 1, N)))
    rng = np.random.default_rng(SEED)
    zs = 0.5 * np.sqrt(rng.uniform(size=64)) * np.exp(2j * np.pi * rng.uniform(size=64))
    zs = np.concatenate([zs, 0.5 * np.exp(2j * np.pi * np.arange(16) / 16)])
    worst = -np.inf
    for z in zs:
        val = series_eval(s.series, z)
        r = np.linalg.norm((T.entries - z * np.eye(N))[: T.row_window] @ val.value)
        worst = max(worst, r - val.tail_bound)
    rec = section_diagnostics(T, s).recurrence_residual
    criterion(2, "canonical section of S*", exact and worst <= 0 and rec <= 1e-12,
              f"f_k = e_k exact: {exact}, max(residual - tail bound) = {worst:.1e}, recurrence = {rec:.1e}")


def test_03_weighted_radius(criterion):
    T = shift_operator(128, 2.0)
    R = root_test_radius(canonical_section(T, 0.0, _e(128, 0), 40).series)
    criterion(3, "weighted radius", 1.9 <= R <= 2.1, f"R = {R:.6f} for weights = 2, K = 40")


def test_04_pseudocanonical_minimality(criterion):
    N, K = 128, 40
    sections = []
    for w in ([1.0], [2.0], [1.0, 3.0, 0.5]):
        sections.append(canonical_section(shift_operator(N, w, periodic=True), 0.0, _e(N, 0), K))
    sections.append(canonical_section(shift_operator(N, 1.0, multiplicity=2), 0.0, _e(N, 1), K))
    T = shift_operator(N, 1.0)
    for z0 in (0.3, -0.2 + 0.2j):
        sections.append(canonical_section(T, z0, kernel_basis(T, z0).columns[:, 0], 30))
    base = sections[0]
    factor = ScalarSeries.polynomial([1, 0.5, -0.25j], K)
    sections.append(pseudocanonicalize(section_from_coefficients(T, 0.0, series_mul(factor, base.series).coefficients))[1])
    worst, tested = 0.0, 0
    for s in sections:
        assert pseudocanonical_check(s).passed
        worst = max(worst, abs(orthogonality_gap(s) - np.linalg.norm(s.coefficients[0])))
        tested += 1
    criterion(4, "pseudocanonical minimality", worst <= 1e-10,
              f"max |dist(f0, span f_k) - ||f0||| = {worst:.1e} over {tested} sections")


def test_05_normalization_roundtrip(criterion):
    N, K = 128, 40
    T = shift_operator(N, 1.0)
    s = canonical_section(T, 0.0, _e(N, 0), K)
    lam = section_from_coefficients(T, 0.0, series_mul(ScalarSeries.polynomial([1, 1], K), s.series).coefficients)
    h, mu = pseudocanonicalize(lam)
    inv = series_div(ScalarSeries.constant(1.0, K), ScalarSeries.polynomial([1, 1], K))
    h_err = float(np.max(np.abs(h.coefficients - inv.coefficients)))
    h_ref = float(np.max(np.abs(h.coefficients - (-1.0) ** np.arange(K + 1))))
    mu_err = float(np.max(np.abs(mu.coefficients - s.coefficients)))
    criterion(5, "normalization roundtrip", max(h_err, h_ref) <= 1e-12 and mu_err <= 1e-12,
              f"|h - 1/(1+z)| = {max(h_err, h_ref):.1e}, |mu - s| = {mu_err:.1e}")


def test_06_decomposition_reconstruction(criterion):
    rng = np.random.default_rng(SEED)
    N, K = 128, 40
    worst_rec, worst_g0 = 0.0, 0.0
    for trial in range(20):
        m = 2 + trial % 2
        T = shift_operator(N, 1.0, multiplicity=m)
        z0 = 0.0 if trial < 4 else 0.3 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        Q = kernel_basis(T, z0).columns @ _random_unitary(rng, m)
        gam = canonical_tuple(T, z0, Q, K)
        lam = gam[0].series
        for i in range(1, m):
            c = (rng.normal(size=K + 1) + 1j * rng.normal(size=K + 1)) * 0.5 ** np.arange(K + 1)
            c[0] = 0.0
            lam = lam + series_mul(ScalarSeries(c, z0), gam[i].series)
        d = decompose_pseudocanonical(section_from_coefficients(T, z0, lam.coefficients))
        worst_rec = max(worst_rec, d.reconstruction_residual)
        worst_g0 = max(worst_g0, d.g_at_z0)
    criterion(6, "decomposition reconstruction", worst_rec <= 1e-10 and worst_g0 <= 1e-12,
              f"20 sections over (S*)^2, (S*)^3: reconstruction {worst_rec:.1e}, max |g_i(z0)| = {worst_g0:.1e}")


def test_07_tuple_relation(criterion):
    rng = np.random.default_rng(SEED)
    N, K = 128, 40
    T = shift_operator(N, 1.0, multiplicity=2)
    Q = kernel_basis(T, 0.0).columns
    U = _random_unitary(rng, 2)
    rel = relate_tuples(canonical_tuple(T, 0.0, Q, K), canonical_tuple(T, 0.0, Q @ U, K))
    u_err = float(np.max(np.abs(rel.U - U)))
    criterion(7, "tuple relation", rel.relation_residual <= 1e-10 and u_err <= 1e-10,
              f"max_k ||F~_k - F_k U|| = {rel.relation_residual:.1e}, |U_rec - U| = {u_err:.1e}")


def test_08_example_conditional_markushevich(criterion):
    # K = 64 vectors need N = 65 components
    ex = build_named_example("4.2", {}, 65)
    bio = verify_biorthogonal(ex.f, ex.g).residual
    g_rel = verify_shift_relation(ex.T, 0.0, ex.g, "backward", 1).max_residual
    # on {f_n} the backward shift acts through the dual pairing: S f_n = f_{n+1}
    f_rel = verify_shift_relation(adjoint(ex.T), 0.0, ex.f, "forward", 1).max_residual
    literal = verify_shift_relation(ex.T, 0.0, ex.f, "backward", 1)
    ok = bio <= 1e-12 and g_rel <= 1e-12 and f_rel <= 1e-12
    criterion(8, "example f_n = e_n - e_{n+1}", ok,
              f"K = {ex.f.shape[0]}: delta {bio:.1e}, g backward {g_rel:.1e}, f dual relation {f_rel:.1e} "
              f"(literal S* f_1 residual {literal.residuals[0]:.1f})")


def test_09_example_conditional_basis(criterion):
    ex = build_named_example("4.5", {}, 64)
    fwd = verify_shift_relation(adjoint(ex.T), 0.0, ex.f, "forward", 2).max_residual
    back = verify_shift_relation(ex.T, 0.0, ex.g, "backward", 2).max_residual
    m = ex.metadata
    alpha2 = m["alpha_head"][1]
    flagged = m["dual_discrepancy"] and m["printed_dual_failing_pair"] == [3, 2]
    val_err = abs(m["printed_dual_failing_value"] + alpha2)
    ok = fwd <= 1e-12 and back <= 1e-12 and flagged and val_err <= 1e-12
    criterion(9, "example S^2 f_n = f_{n+2}", ok,
              f"forward {fwd:.1e}, backward (corrected dual) {back:.1e}, printed dual flagged at "
              f"(f_{m['printed_dual_failing_pair'][0]}, g_{m['printed_dual_failing_pair'][1]}) "
              f"value {m['printed_dual_failing_value'].real:.6f} = -alpha_2")


def test_10_isometry_criterion(criterion):
    a = check_onb_plain_shift(shift_operator(128, 1.0))
    b = check_onb_plain_shift(shift_operator(128, 2.0))
    dev = b.residuals["isometry_deviation"]
    ok = a.verdict == "pass" and b.verdict == "fail" and abs(dev - 0.75) <= 1e-10
    criterion(10, "plain shift on an ONB", ok, f"S*: {a.verdict}; weights = 2: {b.verdict}, ||B*B - I|| = {dev:.12f}")


def test_11_weighted_shift_criterion(criterion):
    ops = coherence_test_set(128)
    scalar = {k: v for k, v in ops.items() if k in ("backward_shift", "weights_2", "weights_1_plus_1_over_k_plus_1")}
    verdicts = {k: check_onb_weighted_shift(T, 0.0, K=20).verdict for k, T in scalar.items()}
    pert = check_onb_weighted_shift(perturbed_chain_operator(128), 0.0, K=20)
    res = pert.residuals["max_invariance_residual"]
    ok = all(v == "pass" for v in verdicts.values()) and pert.verdict == "fail" and res > 1e-2
    criterion(11, "weighted shift on an ONB", ok, f"{verdicts}; perturbed chain {pert.verdict} with residual {res:.3f}")


def test_12_markushevich_coherence(criterion):
    agree = {}
    for name, T in coherence_test_set(128).items():
        out = check_markushevich_shift(T, 0.0, K=20)
        agree[name] = (out["kernel_powers"].verdict, out["b1_disk"].verdict)
    same = all(a == b for a, b in agree.values())
    dims = check_markushevich_shift(shift_operator(128, 1.0), 0.0, K=20)["kernel_powers"].details["dims"]
    ok = same and dims == list(range(1, 21))
    criterion(12, "kernel-power and B_1 conditions agree", ok,
              f"{sum(a == b for a, b in agree.values())}/{len(agree)} agree; dim ker (B*)^k = k for k <= 20: {dims == list(range(1, 21))}")


def test_13_obstruction_witness(criterion):
    N, K = 128, 40
    worst, verdicts = 0.0, []
    for m in (2, 3):
        T = shift_operator(N, 1.0, multiplicity=m)
        f = canonical_section(T, 0.0, _e(N, 0), K).coefficients
        r = demo_no_mbasis_shift(T, 0.0, BiorthogonalSystem.from_pair(f, biorthogonal_dual(f)))
        worst = max(worst, r.residuals["max_pairing"])
        verdicts.append(r.verdict)
    na = demo_no_mbasis_shift(shift_operator(N, 1.0), 0.0, None).verdict
    ok = verdicts == ["pass", "pass"] and worst <= 1e-10 and na == "not_applicable"
    criterion(13, "no M-basis shift for dim ker >= 2", ok,
              f"max_k |<x, g_k>| = {worst:.1e} for multiplicity 2 and 3; S*: {na}")


def test_14_series_roundtrip(criterion):
    rng = np.random.default_rng(SEED)
    K = 40

    def unit_series():
        # |c_k| <= 2^-k: a unit of the series ring with no zero in the unit disc
        u = np.sqrt(rng.uniform(size=K + 1)) * np.exp(2j * np.pi * rng.uniform(size=K + 1))
        c = u * 0.5 ** np.arange(K + 1)
        c[0] = 1.0
        return ScalarSeries(c)

    worst = 0.0
    for _ in range(100):
        a, b = unit_series(), unit_series()
        worst = max(worst, float(np.max(np.abs(series_div(series_mul(a, b), b).coefficients - a.coefficients))))
    criterion(14, "series mul/div roundtrip", worst <= 1e-12, f"max error {worst:.1e} over 100 series of order 40")


def test_15_determinism(criterion, tmp_path):
    spec = tmp_path / "shift.json"
    spec.write_text(json.dumps({"kind": "backward_weighted_shift", "weights": [1], "truncation": 128}))
    texts = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        assert main(["analyze", "--spec", str(spec), "--z0", "0+0i", "--order", "40", "--out", str(out)]) == 0
        lines = out.read_bytes().splitlines(keepends=True)
        texts.append(b"".join(line for line in lines if not line.lstrip().startswith(b'"wall_time"')))
    criterion(15, "determinism", texts[0] == texts[1], f"two analyze runs byte-identical modulo wall_time ({len(texts[0])} bytes)")
