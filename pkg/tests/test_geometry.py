from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mtk_risk import geometry
from mtk_risk.errors import ConfigError, CuspError, SingularPointError

C = geometry.CurveSampler
S = geometry.SurfaceSampler

ts = st.floats(-3.0, 3.0)


def test_spin_unit_circle():
    np.testing.assert_allclose(geometry.spin_vector(C.circle(1.0), 0.0), [0, 0, 1], atol=1e-15)


def test_spin_radial_ray():
    ray = C.line([1.0, 0.0, 0.0], origin=[1.0, 0.0, 0.0])
    np.testing.assert_array_equal(geometry.spin_vector(ray, 0.0), [0, 0, 0])


def test_spin_circle_radius_two():
    np.testing.assert_allclose(geometry.spin_vector(C.circle(2.0), math.pi / 4), [0, 0, 1], atol=1e-15)


def test_spin_singular_at_origin():
    with pytest.raises(SingularPointError):
        geometry.spin_vector(C.line([1.0, 2.0, 3.0]), 0.0)


@pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
@given(t=ts)
def test_circle_frenet(R, t):
    rep = geometry.frenet(C.circle(R), t)
    assert rep.curvature == pytest.approx(1 / R, abs=1e-12)
    assert abs(rep.torsion) < 1e-12


@given(t=ts, a=st.floats(0.2, 3.0), b=st.floats(-3.0, 3.0))
def test_helix_closed_form(t, a, b):
    rep = geometry.frenet(C.helix(a, b), t)
    d = a * a + b * b
    assert rep.curvature == pytest.approx(a / d, abs=1e-12)
    assert rep.torsion == pytest.approx(b / d, abs=1e-12)
    assert np.linalg.norm(rep.binormal) == pytest.approx(1.0, abs=1e-9)


def test_helix_finite_difference_agrees():
    for t in np.linspace(-2, 2, 9):
        exact = geometry.frenet(C.helix(1, 1), t)
        fd = geometry.frenet(C.helix(1, 1).with_finite_differences(1e-5), t)
        assert fd.curvature == pytest.approx(exact.curvature, abs=1e-4)
        assert fd.torsion == pytest.approx(exact.torsion, abs=1e-4)


def test_straight_line_binormal_undefined():
    rep = geometry.frenet(C.line([1.0, 2.0, 3.0]), 0.7)
    assert rep.curvature == 0.0
    assert not rep.binormal_defined and rep.torsion is None


def test_cusp():
    cusp = C.polynomial([[0, 0, 1], [0, 0, 0, 1]])  # (t^2, t^3)
    with pytest.raises(CuspError):
        geometry.frenet(cusp, 0.0)


def test_fd_step_range():
    with pytest.raises(ConfigError):
        C.circle(1.0).with_finite_differences(1e-1)


@given(t=st.floats(-1.5, 1.5))
def test_reparameterization_invariance(t):
    h = C.helix(1.0, 0.5)
    r1 = geometry.frenet(h, 2 * t)
    r2 = geometry.frenet(h.reparameterized(2.0), t)
    assert r2.curvature == pytest.approx(r1.curvature, abs=1e-8)
    assert r2.torsion == pytest.approx(r1.torsion, abs=1e-8)
    s1, s2 = r1.spin, r2.spin
    np.testing.assert_allclose(s2, 2 * s1, atol=1e-12)


@given(t=ts)
def test_planar_polynomial_has_zero_torsion(t):
    parabola = C.polynomial([[0, 1], [1, 0, 2]])  # (t, 1 + 2 t^2)
    rep = geometry.frenet(parabola, t)
    assert rep.binormal_defined and abs(rep.torsion) < 1e-8


def test_graph_curvature_reduces_to_scalar_form():
    # curve (t, f(t)) with f = t^3: kappa = |f''| / (1 + f'^2)^(3/2)
    c = C.polynomial([[0, 1], [0, 0, 0, 1]])
    t = 0.4
    ref = abs(6 * t) / (1 + (3 * t * t) ** 2) ** 1.5
    assert geometry.frenet(c, t).curvature == pytest.approx(ref, rel=1e-12)


def test_tabulated_curve(tmp_path):
    t = np.linspace(0, 2 * np.pi, 400)
    path = tmp_path / "c.csv"
    path.write_text("t,x,y,z\n" + "\n".join(f"{a},{math.cos(a)},{math.sin(a)},{a}" for a in t))
    rep = geometry.frenet(geometry.load_curve_csv(path), 3.0)
    assert rep.curvature == pytest.approx(0.5, abs=1e-4)
    assert rep.torsion == pytest.approx(0.5, abs=1e-3)


def test_saddle():
    rep = geometry.gauss_curvature(S.saddle(), (0.0, 0.0))
    assert rep.gauss_curvature == -4.0 and rep.classification == "hyperbolic"
    assert rep.hessian_eigenvalues == (-2.0, 2.0) and rep.mixed_signature


def test_paraboloid():
    rep = geometry.gauss_curvature(S.paraboloid(), (0.0, 0.0))
    assert rep.gauss_curvature == 4.0 and rep.classification == "elliptic"


@given(x=st.floats(-10, 10), y=st.floats(-10, 10), a=st.floats(-5, 5), b=st.floats(-5, 5))
def test_plane_is_flat(x, y, a, b):
    rep = geometry.gauss_curvature(S.plane(a, b, 1.0), (x, y))
    assert rep.gauss_curvature == 0.0 and rep.classification == "parabolic"


def test_finite_difference_surface():
    u = S(lambda x, y: x * x - y * y)
    rep = geometry.gauss_curvature(u, (0.0, 0.0))
    assert rep.gauss_curvature == pytest.approx(-4.0, abs=1e-5)
    assert rep.classification == "hyperbolic"


@pytest.mark.parametrize("surface", [S.saddle(), S.paraboloid(), S(lambda x, y: x**4 - 3 * x * x * y + y * y)])
def test_classification_invariant_under_linear_shift(surface):
    base = geometry.gauss_curvature(surface, (0.0, 0.0))
    shifted = geometry.gauss_curvature(surface.plus_linear(3.0, -1.0), (0.0, 0.0))
    assert base.classification == shifted.classification


def test_classify_tolerance():
    assert geometry.classify(-2e-9) == "hyperbolic"
    assert geometry.classify(5e-10) == "parabolic"
    assert geometry.classify(2e-9) == "elliptic"
