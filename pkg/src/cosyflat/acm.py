"""Almost contact metric structures in three dimensions and their residual checks.

Conventions:

* ``phi[i, j]`` is the d_i component of phi(d_j).
* The fundamental form is Phi(X, Y) = g(phi X, Y).
* The shape operator is A X = -nabla_X xi; in the adapted frame
  A E2 = -lam E2, A E3 = lam E3 with lam >= 0, E1 = xi and E3 = phi E2.
* Structure functions are read off the brackets

      [E1, E2] = -lam E2 + alpha E3
      [E1, E3] = -alpha E2 + lam E3
      [E2, E3] = beta E2 - gamma E3

  The middle relation is the one forced by A E3 = lam E3 and
  nabla_xi phi = 0; it is also the form under which the two Jacobi
  relations in :func:`jacobi_residuals` hold.

Residuals are max-abs components in an orthonormal frame, so they are
independent of how the chart scales the coordinate vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from . import jets
from .chart import (
    ChartBox,
    EndomorphismField,
    FrameNorm,
    MetricField,
    OneFormField,
    ScalarField,
    VectorFieldDef,
    d_one_form,
    d_two_form,
    lie_bracket_jet,
)
from .curvature import PointGeometry, killing_tensor, laplacian_value
from .errors import DegenerateA, DomainError, PreconditionFailed
from .exprlang import Binary, Call, Const, Unary, Var, variables
from .jets import Jet3, contract

LAMBDA_MIN = 1e-6


@dataclass(frozen=True)
class WarpProfile:
    """The pair (f, u) of a metric f^2 dx^2 + (u^2/f^2) dy^2 + dz^2."""

    f: ScalarField
    u: ScalarField


@dataclass(frozen=True)
class AcmStructure:
    phi: EndomorphismField
    xi: VectorFieldDef
    eta: OneFormField
    metric: MetricField
    domain: ChartBox
    name: str = "custom"
    warp: WarpProfile | None = None
    kappa: float | None = None  # constant curvature parameter, when the family prescribes one
    params: dict = field(default_factory=dict)

    def at(self, p: Sequence[float]) -> "AcmPoint":
        return AcmPoint(self, p)


class AcmPoint:
    """Cached jets of one structure at one point."""

    def __init__(self, structure: AcmStructure, p: Sequence[float]):
        self.structure = structure
        self.point = tuple(float(v) for v in p)
        self.geometry = PointGeometry(structure.metric, self.point)

    @property
    def conn(self):
        return self.geometry.connection

    @property
    def curvature(self):
        return self.geometry.curvature

    @property
    def norm(self) -> FrameNorm:
        return self.geometry.frame_norm

    @cached_property
    def phi(self) -> Jet3:
        return self.structure.phi.jet(self.point)

    @cached_property
    def xi(self) -> Jet3:
        return self.structure.xi.jet(self.point)

    @cached_property
    def eta(self) -> Jet3:
        return self.structure.eta.jet(self.point)

    @cached_property
    def shape_operator(self) -> Jet3:
        """A^i_j = -(d_j xi^i + Gamma^i_jk xi^k), order 2."""
        return -(self.xi.grad() + contract("ijk,k->ij", self.conn.gamma, self.xi))

    @cached_property
    def nabla_phi(self) -> np.ndarray:
        """``[k, i, j]`` = ((nabla_{d_k} phi) d_j)^i."""
        phi, gamma = self.phi.value, self.conn.christoffel
        return (
            np.einsum("ijk->kij", self.phi.grad().value)
            + np.einsum("ikm,mj->kij", gamma, phi)
            - np.einsum("mkj,im->kij", gamma, phi)
        )

    @cached_property
    def fundamental_form(self) -> Jet3:
        return contract("ki,kj->ij", self.phi, self.conn.metric)


def compat_residuals(S: AcmStructure, p) -> dict[str, float]:
    pt = S.at(p)
    phi, xi, eta, g = pt.phi.value, pt.xi.value, pt.eta.value, pt.geometry.g
    n = pt.norm
    return {
        "phi_squared": n(phi @ phi + np.eye(3) - np.outer(xi, eta), "ud"),
        "eta_xi": abs(float(eta @ xi) - 1.0),
        "metric": n(phi.T @ g @ phi - g + np.outer(eta, eta), "dd"),
        "d_eta": n(d_one_form(pt.eta).value, "dd"),
        "d_Phi": closedness_of_phi(pt),
    }


def closedness_of_phi(pt: AcmPoint) -> float:
    d = float(d_two_form(pt.fundamental_form).value)
    # |dPhi(E1, E2, E3)| = |d_xyz| * |det E|
    return abs(d * np.linalg.det(pt.norm.frame.matrix))


def shape_operator(S: AcmStructure, p) -> np.ndarray:
    return np.array(S.at(p).shape_operator.value)


def _lambda_from(a: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(a))))


def a_property_residuals(S: AcmStructure, p) -> dict[str, float]:
    pt = S.at(p)
    a = pt.shape_operator.value
    g, phi, xi, eta = pt.geometry.g, pt.phi.value, pt.xi.value, pt.eta.value
    n = pt.norm
    ga = g @ a
    eig = np.sort(np.real(np.linalg.eigvals(a)))
    lam = _lambda_from(a)
    return {
        "symmetry": n(ga - ga.T, "dd"),
        "anticommute": n(phi @ a + a @ phi, "ud"),
        "trace": abs(float(np.trace(a))),
        "a_xi": n(a @ xi, "u"),
        "eta_a": n(eta @ a, "d"),
        "spectrum": float(np.max(np.abs(eig - np.array([-lam, 0.0, lam])))),
    }


class NablaPhiResiduals(NamedTuple):
    cosymplectic: float
    kahler_leaves: float
    fundamental: float


def nabla_phi_residuals(S: AcmStructure, p) -> NablaPhiResiduals:
    pt = S.at(p)
    nphi = pt.nabla_phi
    a = pt.shape_operator.value
    g, phi, xi, eta = pt.geometry.g, pt.phi.value, pt.xi.value, pt.eta.value
    phia = phi @ a
    # (nabla_X phi)Y + g(phi A X, Y) xi - eta(Y) phi A X, X = d_k, Y = d_j
    kahler = nphi + np.einsum("i,jm,mk->kij", xi, g, phia) - np.einsum("j,ik->kij", eta, phia)
    # (nabla_{phi X} phi) phi Y + (nabla_X phi) Y - eta(Y) nabla_{phi X} xi, with nabla xi = -A
    fundamental = (
        np.einsum("mk,min,nj->kij", phi, nphi, phi)
        + nphi
        + np.einsum("j,ik->kij", eta, a @ phi)
    )
    n = pt.norm
    return NablaPhiResiduals(n(nphi, "dud"), n(kahler, "dud"), n(fundamental, "dud"))


def curvature_phi_commutation(S: AcmStructure, p) -> float:
    pt = S.at(p)
    r = pt.curvature.riemann
    phi = pt.phi.value
    diff = np.einsum("lmij,mk->lkij", r, phi) - np.einsum("lm,mkij->lkij", phi, r)
    return pt.norm(diff, "uddd")


# -- adapted frame ---------------------------------------------------------


@dataclass(frozen=True)
class AdaptedFrameData:
    point: tuple[float, float, float]
    E1: np.ndarray
    E2: np.ndarray
    E3: np.ndarray
    lam: float
    alpha: float
    beta: float
    gamma: float
    framederivs: dict[str, np.ndarray]  # name -> (E1 f, E2 f, E3 f)
    residuals: dict[str, float]

    def d(self, i: int, name: str) -> float:
        """Directional derivative E_i(name), i in 1..3."""
        return float(self.framederivs[name][i - 1])

    @property
    def vectors(self) -> np.ndarray:
        return np.array([self.E1, self.E2, self.E3])


def _inner(g: Jet3, v: Jet3, w: Jet3) -> Jet3:
    return contract("j,j->", contract("ij,i->j", g, v), w)


def _apply(m: Jet3, v: Jet3) -> Jet3:
    return contract("ij,j->i", m, v)


def adapted_frame(S: AcmStructure, p, lambda_min: float = LAMBDA_MIN) -> AdaptedFrameData:
    pt = S.at(p)
    g, xi, phi, a = pt.conn.metric, pt.xi, pt.phi, pt.shape_operator
    xi_low = contract("ij,j->i", g, xi)

    # a smooth unit field orthogonal to xi, seeded by the best coordinate axis
    gv, xv, xlv = g.value, xi.value, xi_low.value
    proj_norms = [gv[k, k] - xlv[k] ** 2 for k in range(3)]
    k = int(np.argmax(proj_norms))
    w = Jet3.constant(np.eye(3)[k]) - xi_low[k] * xi
    e = w / jets.sqrt(_inner(g, w, w))
    fe = _apply(phi, e)

    ae = _apply(a, e)
    pp, qq = _inner(g, ae, e), _inner(g, ae, fe)
    lam_val = float(np.hypot(pp.value, qq.value))
    if lam_val < lambda_min:
        raise DegenerateA(f"|lambda| = {lam_val:.3e} below {lambda_min:g} at {pt.point}")
    lam = jets.sqrt(pp * pp + qq * qq)
    # eigenvector of [[p, q], [q, -p]] for -lam, from the better conditioned formula
    if pp.value <= 0:
        v1, v2 = pp - lam, qq
    else:
        v1, v2 = -qq, pp + lam
    nv = jets.sqrt(v1 * v1 + v2 * v2)
    e2 = (v1 * e + v2 * fe) / nv
    ev = e2.value
    lead = ev[np.abs(ev) > 1e-12 * np.max(np.abs(ev))][0]
    if lead < 0:
        e2 = -e2
    e3 = _apply(phi, e2)
    e1 = xi.truncate(e2.order)

    b12, b13, b23 = lie_bracket_jet(e1, e2), lie_bracket_jet(e1, e3), lie_bracket_jet(e2, e3)
    alpha = _inner(g, b12, e3)
    beta = _inner(g, b23, e2)
    gamma = -_inner(g, b23, e3)

    E = np.array([e1.value, e2.value, e3.value])

    def along(f: Jet3) -> np.ndarray:
        return E @ f.d1

    derivs = {"lam": along(lam), "alpha": along(alpha), "beta": along(beta), "gamma": along(gamma)}

    lv, al, be, ga = float(lam.value), float(alpha.value), float(beta.value), float(gamma.value)
    E1, E2, E3 = E

    def gnorm(v):
        return float(np.sqrt(max(v @ gv @ v, 0.0)))

    av = a.value
    residuals = {
        "orthonormal": float(np.max(np.abs(E @ gv @ E.T - np.eye(3)))),
        "phi_E2": gnorm(phi.value @ E2 - E3),
        "phi_E3": gnorm(phi.value @ E3 + E2),
        "A_E2": gnorm(av @ E2 + lv * E2),
        "A_E3": gnorm(av @ E3 - lv * E3),
        "comm_12": gnorm(b12.value - (-lv * E2 + al * E3)),
        "comm_13": gnorm(b13.value - (-al * E2 + lv * E3)),
        "comm_23": gnorm(b23.value - (be * E2 - ga * E3)),
        # the [E1, E3] relation with the opposite overall sign, kept for comparison
        "comm_13_flipped": gnorm(b13.value - (al * E2 - lv * E3)),
    }
    return AdaptedFrameData(pt.point, E1, E2, E3, lv, al, be, ga, derivs, residuals)


def frame_residual(frame: AdaptedFrameData) -> float:
    return max(v for k, v in frame.residuals.items() if k != "comm_13_flipped")


def jacobi_residuals(frame: AdaptedFrameData) -> tuple[float, float]:
    lam, al, be, ga = frame.lam, frame.alpha, frame.beta, frame.gamma
    d = frame.d
    r1 = d(2, "lam") - d(3, "alpha") + d(1, "gamma") - al * be + ga * lam
    r2 = d(3, "lam") - d(2, "alpha") - d(1, "beta") - al * ga + be * lam
    return r1, r2


def ricci_adapted(frame: AdaptedFrameData) -> tuple[np.ndarray, float]:
    """Ricci components in the adapted frame from the structure functions."""
    lam, al, be, ga = frame.lam, frame.alpha, frame.beta, frame.gamma
    d = frame.d
    s11 = -2 * lam**2
    s12 = d(2, "lam") + 2 * ga * lam
    s13 = -(d(3, "lam") + 2 * be * lam)
    common = -d(2, "gamma") - d(3, "beta") - be**2 - ga**2
    s22 = -d(1, "lam") + common
    s33 = d(1, "lam") + common
    s23 = -2 * al * lam
    ric = np.array([[s11, s12, s13], [s12, s22, s23], [s13, s23, s33]])
    return ric, float(s11 + s22 + s33)


def ricci_direct_in_frame(S: AcmStructure, frame: AdaptedFrameData) -> np.ndarray:
    ric = S.at(frame.point).curvature.ricci
    E = frame.vectors
    return E @ ric @ E.T


def ricci_crosscheck(S: AcmStructure, p, frame: AdaptedFrameData | None = None) -> float:
    """``max|S_formula - S_direct| / (1 + max|S_direct|)``."""
    frame = frame or adapted_frame(S, p)
    formula, _ = ricci_adapted(frame)
    direct = ricci_direct_in_frame(S, frame)
    return float(np.max(np.abs(formula - direct)) / (1.0 + np.max(np.abs(direct))))


# -- constant sectional curvature equation --------------------------------

_EXPR_TYPES = (Const, Var, Unary, Binary, Call)


def as_scalar_field(obj, allowed: str | None = None) -> ScalarField:
    if isinstance(obj, ScalarField):
        return obj
    if isinstance(obj, _EXPR_TYPES) and allowed is not None:
        extra = variables(obj) - set(allowed)
        if extra:
            raise DomainError(f"expression may only use variables {sorted(allowed)}, found {sorted(extra)}")
    return ScalarField.from_components(obj)


def constsec_terms(f, u, p) -> tuple[float, float]:
    """``(lhs, f^3/u^2)`` where lhs = 2 d_z^2 f - d_x^2 (1/f) - d_x((d_x ln u)/f)."""
    f = as_scalar_field(f, "xz").jet(p)
    u = as_scalar_field(u, "x").jet(p)
    if f.value <= 0 or u.value <= 0:
        raise DomainError(f"f and u must be positive (f = {float(f.value)!r}, u = {float(u.value)!r})")
    inv_f = 1.0 / f
    log_u_x = jets.ln(u).derivative(0)
    lhs = 2.0 * f.partial(2, 2) - inv_f.partial(0, 0) - (log_u_x / f).partial(0)
    return float(lhs), float(f.value**3 / u.value**2)


def constsec_residual(f, u, kappa: float, p) -> float:
    lhs, weight = constsec_terms(f, u, p)
    return abs(lhs + kappa * weight)


def fit_constsec(f, u, points) -> tuple[float, float, np.ndarray]:
    """Best constant kappa (median of point-wise values) and the max residual it leaves."""
    terms = np.array([constsec_terms(f, u, p) for p in points])
    pointwise = -terms[:, 0] / terms[:, 1]
    kappa = float(np.median(pointwise))
    return kappa, float(np.max(np.abs(terms[:, 0] + kappa * terms[:, 1]))), pointwise


# -- Killing eigenfield characterization ----------------------------------


@dataclass(frozen=True)
class TheoremPoint:
    point: tuple[float, float, float]
    lam: float
    eigenvalue: float  # signed eigenvalue of A on K
    eigen_residual: float
    killing_residual: float
    laplacian: float  # positive Laplacian of 1/|K|
    inv_norm: float  # 1/|K|
    xi_log_norm: float  # xi(ln |K|)

    @property
    def kappa(self) -> float:
        return 2.0 * self.laplacian / self.inv_norm**3

    @property
    def corollary_residual(self) -> float:
        """|lambda - xi ln|K|| with lambda the eigenvalue on the partner direction phi K."""
        return abs(-self.eigenvalue - self.xi_log_norm)


def theorem_point(S: AcmStructure, K: VectorFieldDef, p) -> TheoremPoint:
    pt = S.at(p)
    conn = pt.conn
    kj = K.jet(pt.point)
    g = conn.metric
    a = pt.shape_operator.value
    kv, gv = kj.value, g.value
    norm2 = float(kv @ gv @ kv)
    if norm2 <= 0:
        raise PreconditionFailed("|K| > 0", f"K vanishes at {pt.point}")
    ak = a @ kv
    mu = float(ak @ gv @ kv) / norm2
    diff = ak - mu * kv
    eigen_res = float(np.sqrt(max(diff @ gv @ diff, 0.0) / norm2))
    kill = pt.norm(killing_tensor(conn, kj), "dd")
    knorm = jets.sqrt(_inner(g, kj, kj))
    inv = 1.0 / knorm
    xi_log = float(pt.xi.value @ knorm.d1) / float(knorm.value)
    return TheoremPoint(
        pt.point,
        _lambda_from(a),
        mu,
        eigen_res,
        kill,
        laplacian_value(conn, inv),
        float(inv.value),
        xi_log,
    )


@dataclass(frozen=True)
class TheoremResult:
    kappa_hat: float
    max_residual: float
    kappa_variance: float
    branch: str  # "+lambda" or "-lambda": which eigenvalue K carries
    max_eigen_residual: float
    max_killing_residual: float
    max_corollary_residual: float
    points: tuple[TheoremPoint, ...]

    def residual(self, tp: TheoremPoint) -> float:
        return abs(tp.laplacian - 0.5 * self.kappa_hat * tp.inv_norm**3)


def estimate_kappa_and_theorem_residual(
    S: AcmStructure,
    K: VectorFieldDef,
    grid,
    tol: float = 1e-9,
    lambda_min: float = LAMBDA_MIN,
) -> TheoremResult:
    pts = [theorem_point(S, K, p) for p in grid]
    if not pts:
        raise PreconditionFailed("nonempty grid")
    for tp in pts:
        if tp.lam < lambda_min:
            raise PreconditionFailed("A != 0 everywhere", f"lambda = {tp.lam:.3e} at {tp.point}")
        if tp.eigen_residual > tol:
            raise PreconditionFailed("K is an eigenfield of A", f"residual {tp.eigen_residual:.3e} at {tp.point}")
        if tp.killing_residual > tol:
            raise PreconditionFailed("K is a Killing field", f"residual {tp.killing_residual:.3e} at {tp.point}")
    kappas = np.array([tp.kappa for tp in pts])
    kappa_hat = float(np.median(kappas))
    signs = {np.sign(tp.eigenvalue) for tp in pts}
    if len(signs) != 1:
        raise PreconditionFailed("K stays on one eigenvalue branch")
    result = TheoremResult(
        kappa_hat,
        0.0,
        float(np.var(kappas)),
        "+lambda" if signs.pop() > 0 else "-lambda",
        max(tp.eigen_residual for tp in pts),
        max(tp.killing_residual for tp in pts),
        max(tp.corollary_residual for tp in pts),
        tuple(pts),
    )
    return TheoremResult(**{**result.__dict__, "max_residual": max(result.residual(tp) for tp in pts)})
