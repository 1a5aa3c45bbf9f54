"""Built-in almost cosymplectic structures on a box in R^3.

All warped families share the shape

    g = f(x,z)^2 dx^2 + (u(x)^2 / f(x,z)^2) dy^2 + dz^2,
    xi = d_z, eta = dz, phi d_x = (f^2/u) d_y, phi d_y = -(u/f^2) d_x,

whose fundamental form has the single component Phi(d_x, d_y) = u(x).
Every builder checks the structure axioms on a coarse grid before returning.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy import integrate

from . import jets
from .acm import AcmStructure, WarpProfile, as_scalar_field, compat_residuals
from .chart import (
    ChartBox,
    EndomorphismField,
    HalfSpace,
    MetricField,
    OneFormField,
    ScalarField,
    VectorFieldDef,
)
from .errors import BuildError, DomainError, InterpolationRange
from .exprlang import Expr, evaluate, parse_expr
from .ode import OdeSolution, solve_t_ode

AXIOM_TOL = 1e-10


def default_domain() -> ChartBox:
    return ChartBox((-1.0, -1.0, 0.5), (1.0, 1.0, 2.0), (HalfSpace(2, 0.1),))


def _xi_eta() -> tuple[VectorFieldDef, OneFormField]:
    return VectorFieldDef.from_components([0, 0, 1]), OneFormField.from_components([0, 0, 1])


def verify_structure(S: AcmStructure, counts=(2, 2, 2), tol: float = AXIOM_TOL) -> AcmStructure:
    for p in S.domain.grid(counts):
        res = compat_residuals(S, p)
        bad = {k: v for k, v in res.items() if not v <= tol}
        if bad:
            raise BuildError(f"{S.name}: structure axioms fail at {p}: {bad}")
    return S


def _sample_positive(name: str, fn: Callable, domain: ChartBox, counts=(5, 5, 5)) -> None:
    for p in domain.grid(counts) + [domain_corner(domain, c) for c in range(8)]:
        v = float(np.asarray(fn(*p)))
        if not v > 0:
            raise DomainError(f"{name} must be positive on the domain; got {v!r} at {tuple(p)}")


def domain_corner(domain: ChartBox, code: int) -> tuple[float, float, float]:
    return tuple(
        domain.effective_upper(ax) if (code >> ax) & 1 else domain.effective_lower(ax) for ax in range(3)
    )


def warped_structure(
    f: Callable,
    u: Callable,
    domain: ChartBox,
    name: str,
    kappa: float | None = None,
    params: dict | None = None,
) -> AcmStructure:
    """Structure from profile callables f(x, y, z) and u(x, y, z) of coordinate jets."""

    def metric(x, y, z):
        fj, uj = jets.as_jet(f(x, y, z)), jets.as_jet(u(x, y, z))
        zero = fj * 0.0
        return jets.Jet3.stack(
            [
                jets.Jet3.stack([fj * fj, zero, zero]),
                jets.Jet3.stack([zero, (uj * uj) / (fj * fj), zero]),
                jets.Jet3.stack([zero, zero, zero + 1.0]),
            ]
        )

    def phi(x, y, z):
        fj, uj = jets.as_jet(f(x, y, z)), jets.as_jet(u(x, y, z))
        f2 = fj * fj
        zero = fj * 0.0
        return jets.Jet3.stack(
            [
                jets.Jet3.stack([zero, -uj / f2, zero]),
                jets.Jet3.stack([f2 / uj, zero, zero]),
                jets.Jet3.stack([zero, zero, zero]),
            ]
        )

    xi, eta = _xi_eta()
    return AcmStructure(
        phi=EndomorphismField(phi),
        xi=xi,
        eta=eta,
        metric=MetricField(metric, domain),
        domain=domain,
        name=name,
        warp=WarpProfile(ScalarField(f), ScalarField(u)),
        kappa=kappa,
        params=dict(params or {}),
    )


def build_z2(a: float = 1.0, domain: ChartBox | None = None) -> AcmStructure:
    """g = z^2 dx^2 + e^{2ax}/z^2 dy^2 + dz^2 with its almost cosymplectic structure."""
    domain = domain or default_domain()
    if domain.effective_lower(2) <= 0:
        raise DomainError("the z^2 family needs z > 0 on the whole domain")
    a = float(a)

    metric = MetricField.diagonal(lambda x, y, z: z * z, lambda x, y, z: jets.exp(2 * a * x) / (z * z), 1, domain)
    phi = EndomorphismField.from_components(
        [
            [0, lambda x, y, z: -jets.exp(a * x) / (z * z), 0],
            [lambda x, y, z: z * z / jets.exp(a * x), 0, 0],
            [0, 0, 0],
        ]
    )
    xi, eta = _xi_eta()
    S = AcmStructure(
        phi=phi,
        xi=xi,
        eta=eta,
        metric=metric,
        domain=domain,
        name="z2",
        warp=WarpProfile(
            ScalarField(lambda x, y, z: z),
            ScalarField(lambda x, y, z: jets.exp(a * x)),
        ),
        kappa=0.0,
        params={"a": a},
    )
    return verify_structure(S)


def _expr(src) -> Expr:
    return parse_expr(src) if isinstance(src, str) else src


def build_fu(f, u, domain: ChartBox | None = None, kappa: float | None = None) -> AcmStructure:
    """The warped family for user expressions f(x, z) > 0 and u(x) > 0."""
    domain = domain or default_domain()
    f_ast, u_ast = _expr(f), _expr(u)
    fs, us = as_scalar_field(f_ast, "xz"), as_scalar_field(u_ast, "x")
    _sample_positive("f", lambda x, y, z: evaluate(f_ast, x, y, z), domain)
    _sample_positive("u", lambda x, y, z: evaluate(u_ast, x, y, z), domain)
    S = warped_structure(fs.fn, us.fn, domain, "fu", kappa, {"f": f if isinstance(f, str) else None, "u": u if isinstance(u, str) else None})
    return verify_structure(S)


def build_kappa0(
    u,
    A: float,
    B: float,
    C: float,
    D: float,
    domain: ChartBox | None = None,
    x_ref: float | None = None,
) -> AcmStructure:
    """f = u (A z + B) / (C U + D) with U(x) = integral of u from ``x_ref`` (default: domain's lower x)."""
    domain = domain or default_domain()
    u_ast = _expr(u)
    us = as_scalar_field(u_ast, "x")
    x_ref = domain.effective_lower(0) if x_ref is None else float(x_ref)

    def u_value(x: float) -> float:
        return float(evaluate(u_ast, x, 0.0, 0.0))

    def big_u(x: float) -> float:
        val, _ = integrate.quad(u_value, x_ref, x, epsabs=1e-13, epsrel=1e-13, limit=200)
        return val

    def f(x, y, z):
        uj = us.fn(x, y, z)
        U = jets.antiderivative(uj, 0, big_u(float(x.value)))
        return uj * (A * z + B) / (C * U + D)

    _sample_positive("u", lambda x, y, z: u_value(x), domain)
    _sample_positive("A z + B", lambda x, y, z: A * z + B, domain)
    _sample_positive("C U + D", lambda x, y, z: C * big_u(x) + D, domain)
    S = warped_structure(f, us.fn, domain, "kappa0", 0.0, {"A": A, "B": B, "C": C, "D": D, "x_ref": x_ref})
    return verify_structure(S)


def build_kappa_nonzero(
    kappa: float,
    C: float,
    D: float,
    u="1",
    sol: OdeSolution | None = None,
    domain: ChartBox | None = None,
    t0: float = 1.0,
    sign: int = -1,
    h: float = 1e-3,
) -> AcmStructure:
    """f = t(z) u(x) / C with t'' = -kappa t^3/(2 C^2), i.e. s(x) = C/u(x) in f = t/s."""
    domain = domain or default_domain()
    if C <= 0:
        raise DomainError("C must be positive (s = C/u > 0)")
    u_ast = _expr(u)
    us = as_scalar_field(u_ast, "x")
    _sample_positive("u", lambda x, y, z: evaluate(u_ast, x, y, z), domain)
    z_lo, z_hi = domain.effective_lower(2), domain.effective_upper(2)
    if sol is None:
        sol = solve_t_ode(kappa, C, D, t0, sign, (z_lo, z_hi), h)
    elif (sol.kappa, sol.C, sol.D) != (kappa, C, D):
        raise ValueError("ODE solution was computed for different kappa, C, D")
    if sol.z[0] > z_lo + 1e-12 or sol.z[-1] < z_hi - 1e-12:
        raise InterpolationRange(f"ODE solution covers [{sol.z[0]}, {sol.z[-1]}], domain needs [{z_lo}, {z_hi}]")

    def f(x, y, z):
        return sol.t_jet(z) * us.fn(x, y, z) / C

    S = warped_structure(
        f, us.fn, domain, "kappa_nonzero", float(kappa), {"C": C, "D": D, "t0": t0, "sign": sign, "h": sol.h}
    )
    object.__setattr__(S, "params", {**S.params, "ode": sol})
    return verify_structure(S)


def build_product(leaf_curvature: float = 0.0, domain: ChartBox | None = None) -> AcmStructure:
    """N x I with N a constant-curvature surface rho (dx^2 + dy^2), rho = 4/(1 + k r^2)^2."""
    domain = domain or default_domain()
    k = float(leaf_curvature)
    if k == 0.0:
        rho = lambda x, y, z: jets.Jet3.constant(1.0)  # noqa: E731
    else:
        for c in range(8):
            x, y, _ = domain_corner(domain, c)
            if 1 + k * (x * x + y * y) <= 0:
                raise DomainError("leaf chart leaves the conformal disk")
        rho = lambda x, y, z: 4.0 / (1.0 + k * (x * x + y * y)) ** 2  # noqa: E731
    metric = MetricField.diagonal(rho, rho, 1, domain)
    phi = EndomorphismField.from_components([[0, -1, 0], [1, 0, 0], [0, 0, 0]])
    xi, eta = _xi_eta()
    S = AcmStructure(phi, xi, eta, metric, domain, "product", None, None, {"leaf_curvature": k})
    return verify_structure(S)


FAMILIES = ("z2", "fu", "custom", "kappa0", "kappa_nonzero", "product")


def build_family(params: dict, domain: ChartBox | None = None) -> AcmStructure:
    """Build from a plain dict, e.g. ``{"name": "z2", "a": 1}``."""
    p = dict(params)
    name = p.pop("name", None)
    if name == "z2":
        return build_z2(p.get("a", 1.0), domain)
    if name in ("fu", "custom"):
        return build_fu(p["f"], p["u"], domain)
    if name == "kappa0":
        return build_kappa0(p.get("u", "1"), p.get("A", 1.0), p.get("B", 0.0), p.get("C", 1.0), p.get("D", 1.0), domain, p.get("x_ref"))
    if name == "kappa_nonzero":
        return build_kappa_nonzero(
            p.get("kappa", -1.0), p.get("C", 1.0), p.get("D", 1.0), p.get("u", "1"), None, domain,
            p.get("t0", 1.0), p.get("sign", -1), p.get("h", 1e-3),
        )
    if name == "product":
        return build_product(p.get("leaf_curvature", 0.0), domain)
    raise ValueError(f"unknown family {name!r}; expected one of {', '.join(FAMILIES)}")


def two_factor_metric(S: AcmStructure) -> MetricField:
    """dy^2 + (f^4/u^2) dx^2 + (f^2/u^2) dz^2, the conformally rescaled metric of a warped family."""
    if S.warp is None:
        raise ValueError(f"family {S.name} has no warp profile")
    f, u = S.warp.f.fn, S.warp.u.fn

    def gxx(x, y, z):
        fj, uj = jets.as_jet(f(x, y, z)), jets.as_jet(u(x, y, z))
        return (fj * fj) * (fj * fj) / (uj * uj)

    def gzz(x, y, z):
        fj, uj = jets.as_jet(f(x, y, z)), jets.as_jet(u(x, y, z))
        return (fj * fj) / (uj * uj)

    return MetricField.diagonal(gxx, 1, gzz, S.domain)
