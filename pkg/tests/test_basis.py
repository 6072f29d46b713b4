import numpy as np
import pytest

from cdshift.basis import (
    NonMinimalFamilyError,
    basis_diagnostics,
    biorthogonal_dual,
    build_named_example,
    default_alpha,
    example_45_vectors,
    verify_biorthogonal,
    verify_shift_relation,
)
from cdshift.operators import adjoint, shift_operator


def test_small_pair_explicit_and_minimal_norm_duals():
    f = np.array([[1, -1, 0], [0, 1, -1]], dtype=complex)
    g_explicit = np.array([[1, 0, 0], [1, 1, 0]], dtype=complex)
    assert verify_biorthogonal(f, g_explicit).passed
    g = biorthogonal_dual(f)
    assert verify_biorthogonal(f, g).passed
    # least-squares oracle: minimal-norm solutions of F^H g_j = e_j
    oracle = np.linalg.pinv(f.conj()).T
    np.testing.assert_allclose(g, oracle, atol=1e-14)
    assert np.linalg.norm(g - g_explicit) > 0.1


def test_dual_of_scaled_chain_stays_well_conditioned():
    f = np.diag(0.5 ** np.arange(30)).astype(complex)
    g = biorthogonal_dual(f)
    assert verify_biorthogonal(f, g, tol=1e-9).passed


def test_non_minimal_family_rejected():
    f = np.array([[1, 0, 0], [0, 1, 0], [1, 1, 0]], dtype=complex)
    with pytest.raises(NonMinimalFamilyError):
        biorthogonal_dual(f)


def test_difference_family_small():
    ex = build_named_example("4.2", {}, 8)
    np.testing.assert_array_equal(ex.f[0, :3], [1, -1, 0])
    np.testing.assert_array_equal(ex.g[2], [1, 1, 1, 0, 0, 0, 0, 0])
    assert verify_biorthogonal(ex.f, ex.g).passed


def test_difference_family_relations():
    ex = build_named_example("4.2", {}, 65)
    assert verify_biorthogonal(ex.f, ex.g).residual <= 1e-12
    assert verify_shift_relation(ex.T, 0.0, ex.g, "backward", 1).max_residual <= 1e-12
    assert verify_shift_relation(adjoint(ex.T), 0.0, ex.f, "forward", 1).max_residual <= 1e-12
    lit = verify_shift_relation(ex.T, 0.0, ex.f, "backward", 1)
    assert lit.residuals[0] == pytest.approx(1.0)
    assert np.max(lit.residuals[1:]) <= 1e-12


@pytest.mark.parametrize("K", [16, 32, 64])
def test_difference_family_completeness_defect_oracle(K):
    # distance of e_1 to span{e_1-e_2, ..., e_K-e_{K+1}} is 1/sqrt(K+1)
    ex = build_named_example("4.2", {}, K + 1)
    d = basis_diagnostics(ex.f, window=1).completeness_defects[0]
    assert d == pytest.approx(1 / np.sqrt(K + 1), abs=1e-12)


def test_conditional_basis_hand_checked_entries():
    a = default_alpha(6)
    v = example_45_vectors(a, 6)
    # f_1 = e_1 + a_1 e_2 + a_2 e_4 + a_3 e_6
    np.testing.assert_allclose(v["f"][0], [1, a[0], 0, a[1], 0, a[2]])
    # corrected g_4 = e_4 - a_2 e_1 - a_1 e_3
    np.testing.assert_allclose(v["g"][3], [-a[1], 0, -a[0], 1, 0, 0])
    assert verify_biorthogonal(v["f"], v["g"]).passed
    chk = verify_biorthogonal(v["f"], v["g_printed"])
    assert chk.worst_pair == (2, 1)
    assert chk.worst_value == pytest.approx(-a[1])


def test_conditional_basis_relations_and_flag():
    ex = build_named_example("4.5", {}, 64)
    assert ex.step == 2
    assert verify_shift_relation(adjoint(ex.T), 0.0, ex.f, "forward", 2).max_residual <= 1e-12
    assert verify_shift_relation(ex.T, 0.0, ex.g, "backward", 2).max_residual <= 1e-12
    m = ex.metadata
    assert m["dual_discrepancy"]
    assert m["printed_dual_failing_pair"] == [3, 2]
    assert m["printed_dual_failing_value"] == pytest.approx(-m["alpha_head"][1])


def test_conditional_basis_custom_alpha_prefix():
    ex = build_named_example("4.5", {"alpha": [0.1, 0.2]}, 8)
    assert ex.metadata["alpha_head"][:2] == [0.1, 0.2]
    with pytest.raises(ValueError):
        build_named_example("4.5", {"alpha": [-1.0]}, 8)


def test_unknown_example():
    with pytest.raises(ValueError):
        build_named_example("9.9", {}, 8)


def test_shift_relation_on_onb():
    T = shift_operator(12, 1.0)
    ex = build_named_example("shift_onb", {}, 12)
    assert verify_shift_relation(T, 0.0, ex.f, "backward", 1).max_residual == 0.0
