"""Levi-Civita connection, curvature, the Weyl-Schouten tensor and its Cotton residual.

Index conventions (all arrays are coordinate components):

* ``gamma[k, i, j]``  = Gamma^k_ij, so that nabla_{d_i} d_j = Gamma^k_ij d_k
* ``riemann[l, k, i, j]`` = R^l_kij with R(d_i, d_j) d_k = R^l_kij d_l and
  R(X, Y) = [nabla_X, nabla_Y] - nabla_[X, Y]
* ``ricci[j, k]`` = Ric(d_j, d_k) = trace of X -> R(X, d_j) d_k
* ``Q`` (Ricci operator) and ``L`` (Weyl-Schouten) are (1,1) tensors,
  ``Q[a, b]`` = Q^a_b, ``L = Q - (s/4) Id``
* ``nabla_schouten[i, a, b]`` = (nabla_i L)^a_b
* ``cotton[a, i, j]`` = ((nabla_i L) d_j - (nabla_j L) d_i)^a

Sign of the Laplacian: ``laplacian`` returns the *positive* operator
``-g^{ij}(d_i d_j v - Gamma^k_ij d_k v)``, which is minus the usual
Laplace-Beltrami operator.  So ``laplacian(x**2)`` on Euclidean space is -2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .chart import FrameNorm, MetricField, ScalarField, VectorFieldDef, coordinate_frame, metric_jet
from .errors import DimensionError
from .jets import Jet3, contract, einsum1, matrix_inverse


@dataclass(frozen=True)
class ConnectionPoint:
    point: tuple[float, float, float]
    metric: Jet3  # g_ij, order 3
    inverse: Jet3  # g^ij, order 3
    gamma: Jet3  # Gamma^k_ij, order 2

    @property
    def christoffel(self) -> np.ndarray:
        return self.gamma.value

    @property
    def dchristoffel(self) -> np.ndarray:
        """``[k, i, j, m]`` = d_m Gamma^k_ij."""
        return self.gamma.d1

    @property
    def d2christoffel(self) -> np.ndarray:
        return self.gamma.d2


def christoffel(g: MetricField, p: Sequence[float]) -> ConnectionPoint:
    gj = metric_jet(g, p)
    ginv = matrix_inverse(gj)
    dg = gj.grad()  # [a, b, c] = d_c g_ab
    lowered = 0.5 * (einsum1("jli->lij", dg) + einsum1("ilj->lij", dg) - einsum1("ijl->lij", dg))
    gamma = contract("kl,lij->kij", ginv, lowered)
    return ConnectionPoint(tuple(float(v) for v in p), gj, ginv, gamma)


@dataclass(frozen=True)
class CurvaturePoint:
    connection: ConnectionPoint
    riemann_jet: Jet3  # order 1
    ricci_jet: Jet3 | None = None
    scalar_jet: Jet3 | None = None
    ricci_operator_jet: Jet3 | None = None
    schouten_jet: Jet3 | None = None
    nabla_schouten: np.ndarray | None = None

    @property
    def riemann(self) -> np.ndarray:
        return self.riemann_jet.value

    @property
    def ricci(self) -> np.ndarray:
        return self.ricci_jet.value

    @property
    def scalar(self) -> float:
        return float(self.scalar_jet.value)

    @property
    def ricci_operator(self) -> np.ndarray:
        return self.ricci_operator_jet.value

    @property
    def schouten(self) -> np.ndarray:
        return self.schouten_jet.value

    @property
    def cotton(self) -> np.ndarray:
        n = self.nabla_schouten
        return np.einsum("iaj->aij", n) - np.einsum("jai->aij", n)


def riemann(conn: ConnectionPoint) -> CurvaturePoint:
    gamma = conn.gamma
    d_gamma = gamma.grad()  # [l, j, k, i] = d_i Gamma^l_jk
    half = einsum1("ljki->lkij", d_gamma) + contract("lim,mjk->lkij", gamma, gamma)
    # antisymmetrizing a single array keeps R(X,Y) = -R(Y,X) exact in floating point
    r = half - half.transpose(0, 1, 3, 2)
    return CurvaturePoint(conn, r)


def ricci_scalar_schouten(curv: CurvaturePoint) -> CurvaturePoint:
    conn = curv.connection
    ric = einsum1("ikij->jk", curv.riemann_jet)
    q = contract("ab,bc->ac", conn.inverse, ric)
    s = einsum1("aa->", q)
    schouten = q - s * (np.eye(3) / 4.0)
    gamma = conn.gamma
    nabla_l = (
        einsum1("abi->iab", schouten.grad())
        + contract("aic,cb->iab", gamma, schouten)
        - contract("cib,ac->iab", gamma, schouten)
    )
    return CurvaturePoint(conn, curv.riemann_jet, ric, s, q, schouten, np.asarray(nabla_l.value))


def curvature_at(g: MetricField, p: Sequence[float]) -> CurvaturePoint:
    return ricci_scalar_schouten(riemann(christoffel(g, p)))


def first_bianchi(curv: CurvaturePoint) -> np.ndarray:
    """Cyclic sum R(X,Y)Z + R(Y,Z)X + R(Z,X)Y in components ``[l, k, i, j]``."""
    r = curv.riemann
    return r + np.einsum("lijk->lkij", r) + np.einsum("ljki->lkij", r)


def sectional_curvature(curv: CurvaturePoint, X, Y) -> float:
    g = curv.connection.metric.value
    X, Y = np.asarray(X, float), np.asarray(Y, float)
    rxy_y = np.einsum("lkij,i,j,k->l", curv.riemann, X, Y, Y)
    num = rxy_y @ g @ X
    den = (X @ g @ X) * (Y @ g @ Y) - (X @ g @ Y) ** 2
    return float(num / den)


def _frame_norm(curv: CurvaturePoint) -> FrameNorm:
    return FrameNorm(coordinate_frame(curv.connection.metric.value))


def schouten_norm(curv: CurvaturePoint) -> float:
    """Frobenius norm of L in an orthonormal frame."""
    comps = _frame_norm(curv).components(curv.schouten, "ud")
    return float(np.sqrt(np.sum(comps**2)))


def cotton_residual(g: MetricField, p, X, Y) -> float:
    """``|(nabla_X L) Y - (nabla_Y L) X|_g`` at ``p`` for the given vectors."""
    curv = curvature_at(g, p)
    v = np.einsum("aij,i,j->a", curv.cotton, np.asarray(X, float), np.asarray(Y, float))
    gval = curv.connection.metric.value
    return float(np.sqrt(max(v @ gval @ v, 0.0)))


@dataclass(frozen=True)
class CottonResult:
    raw: float
    normalized: float
    schouten_norm: float
    scalar: float


def cotton_check(g: MetricField, p, curv: CurvaturePoint | None = None) -> CottonResult:
    """Cotton residual maximized over pairs of the orthonormalized coordinate basis.

    ``normalized`` divides by ``1 + |L|`` so tolerances do not depend on scale.
    """
    curv = curv or curvature_at(g, p)
    comps = _frame_norm(curv).components(curv.cotton, "udd")
    raw = max(float(np.linalg.norm(comps[:, i, j])) for i in range(3) for j in range(i + 1, 3))
    ln = schouten_norm(curv)
    return CottonResult(raw, raw / (1.0 + ln), ln, curv.scalar)


def _weyl_components(r, g, ginv) -> np.ndarray:
    r, g, ginv = (np.asarray(a, float) for a in (r, g, ginv))
    n = g.shape[0]
    ric = np.einsum("ikij->jk", r)
    q = ginv @ ric
    s = np.trace(q)
    eye = np.eye(n)
    corr = (
        np.einsum("jk,li->lkij", g, q)
        + np.einsum("jk,li->lkij", ric, eye)
        - np.einsum("ik,lj->lkij", g, q)
        - np.einsum("ik,lj->lkij", ric, eye)
    )
    const = np.einsum("jk,li->lkij", g, eye) - np.einsum("ik,lj->lkij", g, eye)
    return r - corr / (n - 2) + s / ((n - 1) * (n - 2)) * const


def weyl_tensor(r, g, ginv=None) -> np.ndarray:
    """Weyl curvature C^l_kij of a curvature tensor in dimension n >= 4."""
    g = np.asarray(g, float)
    n = g.shape[0]
    if n < 4:
        raise DimensionError(f"the Weyl tensor is only informative for n >= 4 (got n = {n}); it vanishes in dimension 3")
    return _weyl_components(r, g, np.linalg.inv(g) if ginv is None else ginv)


def product_with_euclidean(curv: CurvaturePoint, extra: int) -> tuple[np.ndarray, np.ndarray]:
    """Curvature and metric of (M, g) x R^extra at the same point."""
    n = 3 + extra
    r = np.zeros((n,) * 4)
    r[:3, :3, :3, :3] = curv.riemann
    g = np.eye(n)
    g[:3, :3] = curv.connection.metric.value
    return r, g


def killing_tensor(conn: ConnectionPoint, K: Jet3) -> np.ndarray:
    """Components of the Lie derivative of g along K."""
    g = conn.metric.value
    nabla_k = np.einsum("ai->ia", K.grad().value) + np.einsum("aib,b->ia", conn.christoffel, K.value)
    lowered = nabla_k @ g  # [i, j] = g(nabla_i K, d_j)
    return lowered + lowered.T


def killing_residual(g: MetricField, K: VectorFieldDef, p, X=None, Y=None) -> float:
    """``(L_K g)(X, Y)``; with X, Y omitted, the max over orthonormal basis pairs."""
    conn = christoffel(g, p)
    lk = killing_tensor(conn, K.jet(p))
    if X is not None and Y is not None:
        return float(abs(np.asarray(X, float) @ lk @ np.asarray(Y, float)))
    return FrameNorm(coordinate_frame(conn.metric.value))(lk, "dd")


def laplacian_value(conn: ConnectionPoint, v: Jet3) -> float:
    hess = v.d2 - np.einsum("kij,k->ij", conn.christoffel, v.d1)
    return float(-np.einsum("ij,ij->", conn.inverse.value, hess))


def laplacian(g: MetricField, v: ScalarField, p) -> float:
    """Positive (geometers') Laplacian ``-tr(X -> nabla_X grad v)``."""
    return laplacian_value(christoffel(g, p), v.jet(p))


class PointGeometry:
    """Lazily computed connection and curvature of one metric at one point."""

    def __init__(self, g: MetricField, p: Sequence[float]):
        self.metric_field = g
        self.point = tuple(float(v) for v in p)

    @cached_property
    def connection(self) -> ConnectionPoint:
        return christoffel(self.metric_field, self.point)

    @cached_property
    def curvature(self) -> CurvaturePoint:
        return ricci_scalar_schouten(riemann(self.connection))

    @property
    def g(self) -> np.ndarray:
        return self.connection.metric.value

    @property
    def ginv(self) -> np.ndarray:
        return self.connection.inverse.value

    @cached_property
    def frame_norm(self) -> FrameNorm:
        return FrameNorm(coordinate_frame(self.g))

    @cached_property
    def cotton(self) -> CottonResult:
        return cotton_check(self.metric_field, self.point, self.curvature)
