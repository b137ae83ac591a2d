from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from mtk_risk import ergodic, kernel, pwf
from mtk_risk.errors import DimensionError, DivergenceError

W = pwf.WeightingFunctionSpec

# ||T^200 e1|| for the 20x20 TK(0.61) composite scaled to norm 0.9, via scipy quad entries and eigh powers
TK_ORBIT_200 = 2.7207474875163516e-11


@pytest.fixture(scope="module")
def tk_T20():
    K = kernel.build_kernel_matrix(W.tk(0.61), 20, 20)
    return ergodic.scale_to_norm(kernel.composite_T(K), 0.9)


def test_geometric_decay():
    rec = ergodic.orbit(0.5 * np.eye(2), [1.0, 1.0], 3)
    np.testing.assert_array_equal(rec.iterates, [[1, 1], [0.5, 0.5], [0.25, 0.25], [0.125, 0.125]])


def test_identity_orbit():
    f0 = np.array([0.3, -2.0, 5.0])
    rec = ergodic.orbit(np.eye(3), f0, 10)
    assert np.all(rec.iterates == f0)
    np.testing.assert_allclose(rec.time_average, f0, rtol=1e-15)


def test_tk_orbit_matches_eigen_oracle(tk_T20):
    e1 = np.eye(20)[0]
    rec = ergodic.orbit(tk_T20, e1, 200)
    assert rec.norms[-1] == pytest.approx(TK_ORBIT_200, abs=1e-6)
    # independent of the frozen value: eigendecomposition powers of the same matrix
    ev, V = np.linalg.eigh(tk_T20)
    assert rec.norms[-1] == pytest.approx(np.linalg.norm(V @ (ev**200 * (V.T @ e1))), abs=1e-12)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        ergodic.orbit(np.eye(3), [1.0, 2.0], 4)
    with pytest.raises(DimensionError):
        ergodic.orbit(np.ones((2, 3)), [1.0, 2.0, 3.0], 4)


def test_divergence_carries_partial_record():
    with pytest.raises(DivergenceError) as info:
        ergodic.orbit(10 * np.eye(2), [1.0, 0.0], 50)
    rec = info.value.record
    assert rec is not None and rec.norms[-1] > 1e12 and rec.steps < 50


def test_contraction_birkhoff_tends_to_zero(tk_T20):
    f0 = np.eye(20)[0]
    r_small = ergodic.birkhoff_check(tk_T20, f0, 16)
    r_big = ergodic.birkhoff_check(tk_T20, f0, 256)
    assert r_big.invariance_residual < r_small.invariance_residual
    assert np.linalg.norm(r_big.time_average_limit) < np.linalg.norm(r_small.time_average_limit)


def test_residual_monotone_in_dyadic_N(tk_T20):
    f0 = np.eye(20)[0]
    res = [ergodic.birkhoff_check(tk_T20, f0, 2**k).invariance_residual for k in range(4, 11)]
    assert all(b <= a + 1e-9 for a, b in zip(res, res[1:]))


def test_two_cycle_average():
    P = np.array([[0.0, 1.0], [1.0, 0.0]])
    rep = ergodic.birkhoff_check(P, [1.0, 0.0], 8)
    np.testing.assert_allclose(rep.time_average_limit, [0.5, 0.5], atol=1e-15)
    assert rep.invariance_residual == 0.0


def test_identity_birkhoff():
    rep = ergodic.birkhoff_check(np.eye(2), [2.0, 3.0], 5)
    np.testing.assert_allclose(rep.time_average_limit, [2.0, 3.0])
    assert rep.invariance_residual == 0.0 and rep.time_vs_space_gap == 0.0


@pytest.mark.parametrize("n", [2, 3, 5])
def test_permutation_residual_zero(n):
    P = np.roll(np.eye(n), 1, axis=0)
    f0 = np.arange(1.0, n + 1)
    rep = ergodic.birkhoff_check(P, f0, 4 * n)
    assert rep.invariance_residual <= 1e-12


@given(
    arrays(float, 4, elements=st.floats(-5, 5)),
    arrays(float, 4, elements=st.floats(-5, 5)),
    st.floats(-3, 3),
    st.floats(-3, 3),
)
def test_time_average_linearity(f, g, a, b):
    T = ergodic.scale_to_norm(np.random.default_rng(11).normal(size=(4, 4)), 0.8)
    lhs = ergodic.orbit(T, a * f + b * g, 40).time_average
    rhs = a * ergodic.orbit(T, f, 40).time_average + b * ergodic.orbit(T, g, 40).time_average
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


@given(arrays(float, (5, 5), elements=st.floats(-3, 3)), st.floats(0.1, 0.99))
def test_norm_bound(T, s):
    if np.linalg.norm(T, 2) == 0:
        return
    T = ergodic.scale_to_norm(T, s)
    f0 = np.ones(5)
    rec = ergodic.orbit(T, f0, 60)
    bound = s ** np.arange(61) * np.linalg.norm(f0) + 1e-9
    assert np.all(rec.norms <= bound * (1 + 1e-12))


def test_ergodic_basin():
    P = np.array([[0.0, 1.0], [1.0, 0.0]])
    vecs = [np.array([1.0, 1.0]), np.array([1.0, 0.0])]
    # (1, 1) is invariant; (1, 0) averages to (1/2, 1/2) for even N, also invariant
    assert ergodic.ergodic_basin(P, vecs, 8) == [0, 1]
    assert ergodic.ergodic_basin(np.array([[1.0, 0.5], [0.0, 1.0]]), vecs, 8) == [1]


def test_phase_identity():
    pp = ergodic.phase_portrait(W.identity(), 11)
    assert np.all(pp.gap == 0) and pp.crossings == []


def test_phase_prelec_sign_pattern():
    pp = ergodic.phase_portrait(W.prelec(0.65), 101)
    inner = (pp.p > 0) & (pp.p < 1)
    assert np.all(pp.gap[inner & (pp.p < 1 / np.e)] > 0)
    assert np.all(pp.gap[inner & (pp.p > 1 / np.e)] < 0)


def test_phase_tk_bracket_contains_fixed_point():
    pp = ergodic.phase_portrait(W.tk(0.61), 101)
    ps = pwf.fixed_point(W.tk(0.61))
    assert len(pp.crossings) == 1
    lo, hi = pp.crossings[0]
    assert lo < ps < hi
