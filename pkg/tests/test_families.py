import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cosyflat.acm import compat_residuals, constsec_residual, shape_operator
from cosyflat.chart import ChartBox, HalfSpace
from cosyflat.curvature import cotton_check, curvature_at, sectional_curvature
from cosyflat.errors import BuildError, DomainError, InterpolationRange, LeftAdmissibleRegion
from cosyflat.families import (
    build_family,
    build_fu,
    build_kappa0,
    build_kappa_nonzero,
    build_product,
    build_z2,
    default_domain,
    two_factor_metric,
)
from cosyflat.ode import monotone_stretches, quadrature_crosscheck, solve_t_ode


def test_z2_metric_identity_at_001(z2):
    assert np.allclose(z2.metric.value((0, 0, 1)), np.eye(3), atol=1e-15)


def test_z2_rejects_domain_touching_zero():
    with pytest.raises(DomainError):
        build_z2(1.0, ChartBox((-1, -1, -0.5), (1, 1, 2)))


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_z2_equals_kappa0_specialization(a, grid):
    # with U measured from x_ref, D = e^{a x_ref} plays the role of the vanishing constant
    x_ref = -1.0
    k0 = build_kappa0(f"exp({a}*x)", 1.0, 0.0, a, math.exp(a * x_ref), x_ref=x_ref)
    S = build_z2(a)
    for p in grid[::3]:
        assert np.max(np.abs(k0.metric.value(p) - S.metric.value(p))) < 1e-12
        assert np.max(np.abs(k0.phi.value(p) - S.phi.value(p))) < 1e-12


def test_fu_reproduces_z2(z2, grid):
    S = build_fu("z", "exp(x)")
    for p in grid[::4]:
        for a, b in ((S.metric.jet(p), z2.metric.jet(p)), (S.phi.jet(p), z2.phi.jet(p))):
            assert np.max(np.abs(a.coeffs - b.coeffs)) <= 1e-14 * np.max(np.abs(b.coeffs))


def test_fu_euclidean():
    S = build_fu("1", "1")
    assert np.array_equal(S.metric.value((0.1, 0.2, 0.9)), np.eye(3))
    assert not shape_operator(S, (0.1, 0.2, 0.9)).any()


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 1.0), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_fu_phi_closed(c0, c1, c2):
    f = f"{c0}+z^2+{c1}*sin(x*z)".replace("+-", "-")
    u = f"exp({c2}*x)+1"
    S = build_fu(f, u)
    for p in default_domain().grid((2, 2, 2)):
        assert compat_residuals(S, p)["d_Phi"] < 1e-12


def test_fu_sign_violation():
    with pytest.raises(DomainError):
        build_fu("z-1", "1")
    with pytest.raises(DomainError):
        build_fu("z", "x")


def test_fu_variable_restrictions():
    with pytest.raises(DomainError):
        build_fu("z*(1+y^2)", "1")
    with pytest.raises(DomainError):
        build_fu("z", "1+z")


def test_kappa0_axioms_and_cotton(kappa0, grid):
    for p in grid:
        assert max(compat_residuals(kappa0, p).values()) < 1e-10
        assert cotton_check(kappa0.metric, p).normalized < 1e-8


def test_kappa0_sign_violation():
    with pytest.raises(DomainError):
        build_kappa0("1", -1.0, 0.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        build_kappa0("1", 1.0, 0.0, -1.0, 0.5)


def test_kappa0_antiderivative_matches_quadrature(kappa0):
    # f = u (Az+B)/(C U + D) with U = int_{-1}^x (1 + s^2) ds
    x, z = 0.4, 1.3
    U = (x + x**3 / 3) - (-1 - 1 / 3)
    f = (1 + x**2) * (z + 2) / (U + 1)
    assert kappa0.warp.f.value((x, 0, z)) == pytest.approx(f, rel=1e-13)


# -- ODE ------------------------------------------------------------------


def test_ode_first_integral_kappa_pos():
    sol = solve_t_ode(1.0, 1.0, 16.0, 1.0, 1, (0.0, 1.0), 1e-3)
    assert sol.conserved_value == 4.0
    assert sol.drift() < 1e-8
    assert np.all(sol.t > 0)


def test_ode_kappa_zero_is_linear():
    sol = solve_t_ode(0.0, 1.0, 4.0, 1.0, 1, (0.0, 1.0), 1e-3)
    # t' = sqrt(D)/(2C) = 1
    assert np.max(np.abs(sol.t - (1 + sol.z))) < 1e-12


def test_ode_quadrature_crosscheck():
    sol = solve_t_ode(1.0, 1.0, 16.0, 1.0, 1, (0.0, 1.0), 1e-3)
    assert len(monotone_stretches(sol)) == 2  # passes a turning point near z = 0.81
    assert quadrature_crosscheck(sol) < 1e-6


def test_ode_convergence_order():
    a = solve_t_ode(1.0, 1.0, 16.0, 1.0, 1, (0.0, 1.0), 1e-3).drift()
    b = solve_t_ode(1.0, 1.0, 16.0, 1.0, 1, (0.0, 1.0), 5e-4).drift()
    assert a / b >= 8


def test_ode_leaves_region():
    with pytest.raises(LeftAdmissibleRegion) as info:
        solve_t_ode(1.0, 1.0, 16.0, 1.0, -1, (0.0, 1.0), 1e-3)
    assert 0.4 < info.value.last_valid_z < 0.6
    with pytest.raises(LeftAdmissibleRegion):
        solve_t_ode(1.0, 1.0, 0.5, 1.0, 1, (0.0, 1.0), 1e-3)


def test_ode_interpolation_range():
    sol = solve_t_ode(-1.0, 1.0, 1.0, 1.0, -1, (0.5, 1.0), 1e-3)
    with pytest.raises(InterpolationRange):
        sol.derivatives(1.5)
    with pytest.raises(InterpolationRange):
        build_kappa_nonzero(-1.0, 1.0, 1.0, sol=sol)


def test_hermite_jet_solves_ode():
    sol = solve_t_ode(-1.0, 1.0, 1.0, 1.0, -1, (0.5, 2.0), 1e-3)
    for z in (0.5013, 1.2345, 1.9999):
        t, dt, ddt, _ = sol.derivatives(z)
        assert ddt == pytest.approx(-sol.kappa * t**3 / 2)
        assert abs(dt**2 + sol.kappa * t**4 / 4 - 0.25) < 1e-12


# -- kappa != 0 -----------------------------------------------------------


def test_kappa_neg_constsec_and_cotton(kappa_neg, grid):
    for p in grid:
        assert constsec_residual(kappa_neg.warp.f, kappa_neg.warp.u, -1.0, p) < 1e-7
        assert cotton_check(kappa_neg.metric, p).normalized < 1e-7


@pytest.mark.parametrize("kappa,D,sign", [(-1.0, 1.0, -1), (1.0, 16.0, 1)])
def test_two_factor_constant_curvature(kappa, D, sign, grid):
    S = build_kappa_nonzero(kappa, 1.0, D, u="1+0.5*x^2", sign=sign, t0=1.0)
    g2 = two_factor_metric(S)
    for p in grid[::3]:
        curv = curvature_at(g2, p)
        assert sectional_curvature(curv, [1, 0, 0], [0, 0, 1]) == pytest.approx(kappa, abs=1e-6)
        assert cotton_check(g2, p).normalized < 1e-8


def test_kappa_nonzero_with_c_not_one(grid):
    S = build_kappa_nonzero(-1.0, 2.0, 1.0, u="exp(0.3*x)")
    assert max(constsec_residual(S.warp.f, S.warp.u, -1.0, p) for p in grid[::5]) < 1e-7


# -- product --------------------------------------------------------------


def test_flat_product(product_flat, grid):
    for p in grid[::5]:
        assert not curvature_at(product_flat.metric, p).riemann.any()


def test_curved_product(product_curved, grid):
    for p in grid:
        assert cotton_check(product_curved.metric, p).normalized < 1e-8
        assert not shape_operator(product_curved, p).any()
    curv = curvature_at(product_curved.metric, (0.3, -0.2, 1.0))
    assert sectional_curvature(curv, [1, 0, 0], [0, 1, 0]) == pytest.approx(1.0, abs=1e-12)


def test_hyperbolic_leaf_leaves_disk():
    with pytest.raises(DomainError):
        build_product(-1.0)


def test_build_family_dispatch():
    assert build_family({"name": "z2", "a": 2}).params["a"] == 2
    assert build_family({"name": "custom", "f": "z", "u": "1"}).name == "fu"
    assert build_family({"name": "product"}).name == "product"
    with pytest.raises(ValueError):
        build_family({"name": "sphere"})


def test_builder_self_check_catches_broken_structure():
    from cosyflat.families import verify_structure, warped_structure
    from cosyflat.chart import EndomorphismField

    S = warped_structure(lambda x, y, z: z, lambda x, y, z: x * 0 + 1, default_domain(), "broken")
    broken = type(S)(EndomorphismField.from_components([[0, -2, 0], [1, 0, 0], [0, 0, 0]]), S.xi, S.eta, S.metric, S.domain)
    with pytest.raises(BuildError):
        verify_structure(broken)
