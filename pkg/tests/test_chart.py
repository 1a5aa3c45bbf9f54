import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cosyflat.chart import (
    ChartBox,
    HalfSpace,
    MetricField,
    OneFormField,
    TwoFormField,
    VectorFieldDef,
    d_one_form,
    exterior_derivative,
    gram_schmidt,
    lie_bracket,
    lie_bracket_jet,
    metric_eval,
)
from cosyflat.errors import DegenerateFrame, SingularMetric
from cosyflat.exprlang import parse_expr
from cosyflat.families import build_z2

from fdcheck import fd_relative_error

coef = st.floats(-2, 2, allow_nan=False)
point = st.tuples(*[st.floats(-1, 1)] * 3)


def poly_components(c):
    # cubic-ish polynomial in x, y, z built from nine coefficients
    return f"{c[0]}+{c[1]}*x+{c[2]}*y*z+{c[3]}*x^2*z+{c[4]}*y^3+{c[5]}*x*y+{c[6]}*z^2+{c[7]}*x*y*z+{c[8]}*sin(x+z)"


poly = st.lists(coef, min_size=9, max_size=9).map(lambda c: parse_expr(poly_components(c).replace("+-", "-")))
polys3 = st.tuples(poly, poly, poly)


def test_grid_is_cell_centred_and_admissible():
    box = ChartBox((-1, -1, 0), (1, 1, 2), (HalfSpace(2, 0.5),))
    pts = box.grid((2, 2, 4))
    assert all(box.admissible(p) for p in pts)
    assert sorted({p[2] for p in pts}) == [0.75, 1.25, 1.75]
    assert pts == sorted(pts)


def test_euclidean_metric_eval():
    gj, inv = metric_eval(MetricField.euclidean(), (0.3, 0.2, 0.1))
    assert np.array_equal(gj.value, np.eye(3)) and np.array_equal(inv, np.eye(3))
    assert not gj.d1.any()


def test_z2_metric_at_001():
    gj, inv = metric_eval(build_z2(1.0).metric, (0, 0, 1))
    assert np.allclose(gj.value, np.eye(3), atol=1e-15)
    assert gj.d1[0, 0, 2] == pytest.approx(2.0)


def test_z2_metric_singular_at_z0():
    g = build_z2(1.0).metric
    with pytest.raises(SingularMetric):
        metric_eval(g, (0, 0, 0))


def test_inverse_on_all_families(all_families, coarse_grid):
    for S in all_families.values():
        for p in coarse_grid:
            gj, inv = metric_eval(S.metric, p)
            assert np.max(np.abs(gj.value @ inv - np.eye(3))) < 1e-12


def test_metric_symmetric_by_construction():
    g = MetricField.from_components([["1+x^2", "x*y", 0], ["99", "2", 0], [0, 0, 1]])
    val = g.value((0.5, 0.5, 0.5))
    assert np.array_equal(val, val.T)


def test_coordinate_fields_commute():
    dx = VectorFieldDef.from_components([1, 0, 0])
    dz = VectorFieldDef.from_components([0, 0, 1])
    assert not lie_bracket(dx, dz, (0.1, 0.2, 0.3)).value.any()


def test_bracket_z_with_x_over_z():
    e1 = VectorFieldDef.from_components([0, 0, 1])
    e2 = VectorFieldDef.from_components(["1/z", 0, 0])
    b = lie_bracket(e1, e2, (0, 0, 1))
    assert np.allclose(b.value, [-1, 0, 0])


@settings(max_examples=40, deadline=None)
@given(polys3, polys3, point)
def test_bracket_antisymmetric(a, b, p):
    X, Y = VectorFieldDef.from_components(list(a)), VectorFieldDef.from_components(list(b))
    assert np.max(np.abs(lie_bracket(X, Y, p).coeffs + lie_bracket(Y, X, p).coeffs)) == 0


@settings(max_examples=30, deadline=None)
@given(polys3, polys3, polys3, point)
def test_bracket_jacobi(a, b, c, p):
    X, Y, Z = (VectorFieldDef.from_components(list(v)).jet(p) for v in (a, b, c))
    cyc = lie_bracket_jet(X, lie_bracket_jet(Y, Z)) + lie_bracket_jet(Y, lie_bracket_jet(Z, X)) + lie_bracket_jet(Z, lie_bracket_jet(X, Y))
    scale = 1 + np.max(np.abs(X.coeffs)) ** 2 * np.max(np.abs(Y.coeffs)) * np.max(np.abs(Z.coeffs)) * 10
    assert np.max(np.abs(cyc.value)) < 1e-10 * scale


def test_d_dz_vanishes():
    assert not exterior_derivative(OneFormField.from_components([0, 0, 1]), (0.1, 0.2, 0.3)).any()


def test_d_of_two_exp_x_dxdy():
    omega = TwoFormField.from_components(["2*exp(x)", 0, 0])
    assert exterior_derivative(omega, (0.4, -0.3, 1.2)) == 0


def test_d_x_dy():
    d = exterior_derivative(OneFormField.from_components([0, "x", 0]), (0.5, 0.5, 0.5))
    assert np.array_equal(d, [1, 0, 0])


@settings(max_examples=50, deadline=None)
@given(polys3, point)
def test_d_squared_zero(comps, p):
    w = OneFormField.from_components(list(comps)).jet(p)
    dw = d_one_form(w)
    from cosyflat.chart import d_two_form

    assert abs(float(d_two_form(dw).value)) < 1e-12 * (1 + np.max(np.abs(w.coeffs)))


def test_gram_schmidt_orthonormal_input():
    v = np.eye(3)
    f = gram_schmidt(v, np.eye(3))
    assert np.max(np.abs(f.vectors - v)) < 1e-14


def test_gram_schmidt_z2_at_002():
    g = build_z2(1.0).metric.value((0, 0, 2))
    f = gram_schmidt(np.eye(3), g)
    assert np.allclose(f.vectors, np.diag([0.5, 2.0, 1.0]), atol=1e-15)
    assert np.allclose(f.gram(), np.eye(3), atol=1e-15)


def test_gram_schmidt_collinear():
    with pytest.raises(DegenerateFrame):
        gram_schmidt([[1, 0, 0], [2, 0, 0], [0, 0, 1]], np.eye(3))


def _field_jets(S):
    yield "metric", lambda q: S.metric.jet(q)
    yield "phi", lambda q: S.phi.jet(q)
    if S.warp is not None:
        yield "f", lambda q: S.warp.f.jet(q)
        yield "u", lambda q: S.warp.u.jet(q)


def test_jets_match_finite_differences(all_families):
    rng = np.random.default_rng(7)
    dom = next(iter(all_families.values())).domain
    lo = np.array([dom.effective_lower(i) for i in range(3)]) + 0.01
    hi = np.array([dom.effective_upper(i) for i in range(3)]) - 0.01
    pts = rng.uniform(lo, hi, size=(100, 3))
    for name, S in all_families.items():
        for fname, fn in _field_jets(S):
            worst = max(fd_relative_error(fn, p) for p in pts)
            assert worst < 1e-5, (name, fname, worst)
