"""Tensor fields on a single coordinate chart of R^3.

Fields are callables of the three coordinate jets ``(x, y, z)``; evaluating
a field at a point feeds it the coordinate functions expanded there, so the
result carries exact partial derivatives through order 3.

Two-forms are stored by their components on the ordered basis
``dx^dy, dx^dz, dy^dz`` with the determinant convention
``(dx^dy)(d_x, d_y) = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable, Sequence

import numpy as np

from . import jets
from .errors import DegenerateFrame, DivisionByZero, DomainError, SingularMetric
from .exprlang import Binary, Call, Const, Unary, Var, evaluate, parse_expr
from .jets import Jet3, contract

_EXPR_TYPES = (Const, Var, Unary, Binary, Call)
AXES = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class HalfSpace:
    """The excluded set ``{p : p[axis] <= bound}`` (or ``>=`` when ``upper``)."""

    axis: int
    bound: float
    upper: bool = False

    def contains(self, p: Sequence[float]) -> bool:
        v = p[self.axis]
        return v >= self.bound if self.upper else v <= self.bound


@dataclass(frozen=True)
class ChartBox:
    lower: tuple[float, float, float]
    upper: tuple[float, float, float]
    excluded: tuple[HalfSpace, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))
        object.__setattr__(self, "excluded", tuple(self.excluded))
        if len(self.lower) != 3 or len(self.upper) != 3:
            raise ValueError("chart boxes are three dimensional")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError(f"lower {self.lower} must be below upper {self.upper} componentwise")

    def admissible(self, p: Sequence[float]) -> bool:
        inside = all(lo <= v <= hi for lo, v, hi in zip(self.lower, p, self.upper))
        return inside and not any(h.contains(p) for h in self.excluded)

    def effective_lower(self, axis: int) -> float:
        """Lowest admissible coordinate along ``axis`` once half-spaces are removed."""
        lo = self.lower[axis]
        for h in self.excluded:
            if h.axis == axis and not h.upper:
                lo = max(lo, h.bound)
        return lo

    def effective_upper(self, axis: int) -> float:
        hi = self.upper[axis]
        for h in self.excluded:
            if h.axis == axis and h.upper:
                hi = min(hi, h.bound)
        return hi

    def grid(self, counts: Sequence[int] = (5, 5, 5)) -> list[tuple[float, float, float]]:
        """Cell-centre sample points, excluded sets removed, in x-major order."""
        axes = []
        for lo, hi, n in zip(self.lower, self.upper, counts):
            step = (hi - lo) / n
            axes.append([lo + (i + 0.5) * step for i in range(n)])
        return [p for p in product(*axes) if self.admissible(p)]


def _component(entry) -> Callable[[Jet3, Jet3, Jet3], Jet3]:
    if isinstance(entry, str):
        entry = parse_expr(entry)
    if isinstance(entry, _EXPR_TYPES):
        return lambda x, y, z, _e=entry: jets.as_jet(evaluate(_e, x, y, z))
    if callable(entry):
        return lambda x, y, z, _f=entry: jets.as_jet(_f(x, y, z))
    value = float(entry)
    return lambda x, y, z: Jet3.constant(value)


class TensorField:
    """A tensor field given by a callable of the coordinate jets."""

    shape: tuple[int, ...] = ()

    def __init__(self, fn: Callable[[Jet3, Jet3, Jet3], Jet3]):
        self.fn = fn

    @classmethod
    def from_components(cls, entries):
        """Build from a (nested) list of numbers, expressions or callables."""
        arr = np.empty(cls.shape, dtype=object)
        flat = np.array(entries, dtype=object).reshape(cls.shape) if cls.shape else None
        if cls.shape:
            for idx in np.ndindex(cls.shape):
                arr[idx] = _component(flat[idx])
        else:
            single = _component(entries)

        def fn(x, y, z):
            if not cls.shape:
                return single(x, y, z)
            vals = [arr[idx](x, y, z) for idx in np.ndindex(cls.shape)]
            stacked = Jet3.stack(vals)
            return Jet3(stacked.coeffs.reshape(cls.shape + (jets.NCOEF,)), stacked.order)

        return cls(fn)

    def jet(self, p: Sequence[float]) -> Jet3:
        out = jets.as_jet(self.fn(*jets.coordinate_jets(p)))
        if out.shape != self.shape:
            out = Jet3(np.broadcast_to(out.coeffs, self.shape + (jets.NCOEF,)), out.order)
        return out

    def value(self, p: Sequence[float]) -> np.ndarray:
        return self.jet(p).value


class ScalarField(TensorField):
    shape = ()


class VectorFieldDef(TensorField):
    shape = (3,)


class OneFormField(TensorField):
    shape = (3,)


class EndomorphismField(TensorField):
    """A (1,1) tensor field; entry ``[i][j]`` is the ``d_i`` component of the image of ``d_j``."""

    shape = (3, 3)


class TwoFormField(TensorField):
    """Components on ``dx^dy, dx^dz, dy^dz``."""

    shape = (3,)

    def full_jet(self, p) -> Jet3:
        return two_form_matrix(self.jet(p))


class MetricField(TensorField):
    shape = (3, 3)

    def __init__(self, fn, domain: ChartBox | None = None):
        super().__init__(fn)
        self.domain = domain

    @classmethod
    def from_components(cls, entries, domain: ChartBox | None = None):
        rows = np.array(entries, dtype=object).reshape(3, 3)
        comps = {(i, j): _component(rows[i, j]) for i in range(3) for j in range(i, 3)}

        def fn(x, y, z):
            vals = {k: c(x, y, z) for k, c in comps.items()}
            return Jet3.stack(
                [Jet3.stack([vals[(min(i, j), max(i, j))] for j in range(3)]) for i in range(3)]
            )

        return cls(fn, domain)

    @classmethod
    def diagonal(cls, gxx, gyy, gzz, domain: ChartBox | None = None):
        return cls.from_components([[gxx, 0, 0], [0, gyy, 0], [0, 0, gzz]], domain)

    @classmethod
    def euclidean(cls, domain: ChartBox | None = None):
        return cls.diagonal(1, 1, 1, domain)


def two_form_matrix(components: Jet3) -> Jet3:
    """Antisymmetric 3x3 jet from (xy, xz, yz) components."""
    xy, xz, yz = components[0], components[1], components[2]
    zero = xy * 0.0
    return Jet3.stack(
        [
            Jet3.stack([zero, xy, xz]),
            Jet3.stack([-xy, zero, yz]),
            Jet3.stack([-xz, -yz, zero]),
        ]
    )


def check_positive_definite(g0: np.ndarray) -> None:
    scale = float(np.max(np.abs(g0)))
    if not np.all(np.isfinite(g0)) or scale == 0.0:
        raise SingularMetric("metric value is zero or not finite")
    det = float(np.linalg.det(g0))
    if abs(det) < 1e-12 * scale**3:
        raise SingularMetric(f"metric determinant {det!r} below 1e-12 * scale")
    minors = [g0[0, 0], np.linalg.det(g0[:2, :2]), det]
    if any(m <= 0 for m in minors):
        raise SingularMetric("metric is not positive definite")


def metric_jet(g: MetricField, p: Sequence[float]) -> Jet3:
    try:
        gj = g.jet(p)
    except (DivisionByZero, DomainError) as exc:
        raise SingularMetric(f"metric undefined at {tuple(p)}: {exc}") from exc
    check_positive_definite(np.asarray(gj.value))
    return gj


def metric_eval(g: MetricField, p: Sequence[float]) -> tuple[Jet3, np.ndarray]:
    """Component jets of the metric at ``p`` and the numeric inverse matrix."""
    gj = metric_jet(g, p)
    return gj, np.linalg.inv(gj.value)


def lie_bracket_jet(X: Jet3, Y: Jet3) -> Jet3:
    """``[X, Y]^i = X^j d_j Y^i - Y^j d_j X^i`` for vector jets (one order is lost)."""
    return contract("j,ij->i", X, Y.grad()) - contract("j,ij->i", Y, X.grad())


def lie_bracket(X: VectorFieldDef, Y: VectorFieldDef, p: Sequence[float]) -> Jet3:
    return lie_bracket_jet(X.jet(p), Y.jet(p))


def d_one_form(omega: Jet3) -> Jet3:
    """Exterior derivative of a one-form jet as an antisymmetric matrix jet."""
    grad = omega.grad()  # [j, i] = d_i omega_j
    return grad.transpose(1, 0) - grad


def d_two_form(omega: Jet3) -> Jet3:
    """Exterior derivative of an antisymmetric matrix jet: the xyz component."""
    grad = omega.grad()  # [i, j, k] = d_k omega_ij
    return grad[1, 2, 0] - grad[0, 2, 1] + grad[0, 1, 2]


def exterior_derivative(omega: OneFormField | TwoFormField, p: Sequence[float]):
    """Two-form value ``(xy, xz, yz)`` for a one-form, or the xyz component for a two-form."""
    if isinstance(omega, TwoFormField):
        return float(d_two_form(omega.full_jet(p)).value)
    d = d_one_form(omega.jet(p)).value
    return np.array([d[0, 1], d[0, 2], d[1, 2]])


@dataclass(frozen=True)
class FramePoint:
    """Frame vectors at a point; ``vectors[a]`` holds the components of ``E_a``."""

    vectors: np.ndarray
    metric: np.ndarray
    orthonormal: bool = True

    @property
    def matrix(self) -> np.ndarray:
        """Columns are the frame vectors."""
        return self.vectors.T

    def gram(self) -> np.ndarray:
        return self.vectors @ self.metric @ self.vectors.T


def gram_schmidt(vectors: Iterable[Sequence[float]], g: np.ndarray) -> FramePoint:
    g = np.asarray(g, dtype=float)
    vs = np.array([np.asarray(v, dtype=float) for v in vectors])
    gram = vs @ g @ vs.T
    norms = np.sqrt(np.abs(np.diag(gram)))
    if np.any(norms == 0) or np.linalg.det(gram / np.outer(norms, norms)) <= 1e-10:
        raise DegenerateFrame("input vectors are (nearly) linearly dependent")
    out = []
    for v in vs:
        w = v.copy()
        for e in out:
            w = w - (e @ g @ w) * e
        out.append(w / np.sqrt(w @ g @ w))
    return FramePoint(np.array(out), g)


def coordinate_frame(g: np.ndarray) -> FramePoint:
    return gram_schmidt(np.eye(3), g)


@dataclass(frozen=True)
class FrameNorm:
    """Measures tensors by the max-abs of their components in an orthonormal frame."""

    frame: FramePoint
    _inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_inv", np.linalg.inv(self.frame.matrix))

    def components(self, t: np.ndarray, kinds: str) -> np.ndarray:
        """Frame components; ``kinds`` has one letter per axis, 'u' (vector) or 'd' (covector)."""
        t = np.asarray(t, dtype=float)
        for axis, kind in enumerate(kinds):
            m = self._inv if kind == "u" else self.frame.matrix.T
            t = np.moveaxis(np.tensordot(m, t, axes=([1], [axis])), 0, axis)
        return t

    def __call__(self, t, kinds: str) -> float:
        return float(np.max(np.abs(self.components(t, kinds)))) if kinds else float(abs(t))
