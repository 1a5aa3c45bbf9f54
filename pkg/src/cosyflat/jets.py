"""Truncated Taylor arithmetic in three variables, through order 3.

A :class:`Jet3` stores the Taylor coefficients ``c[alpha]`` of a function
around a point, ``f(p + h) = sum_alpha c[alpha] h**alpha``, for every
multi-index ``alpha`` with ``|alpha| <= 3`` (20 monomials, packed along the
last array axis).  Partial derivatives are recovered as
``d^alpha f = alpha! * c[alpha]``, so the second and third partials are
symmetric by construction.

Jets may carry leading tensor axes: a metric evaluated at a point is a
single ``Jet3`` of shape ``(3, 3)``.  Arithmetic broadcasts like numpy.
Every jet has an ``order``; differentiating lowers it by one and products
truncate to the smaller order, so coefficients that are not known are never
used.
"""

from __future__ import annotations

import math
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .errors import DivisionByZero, DomainError

DIVISION_FLOOR = 1e-300
MAX_ORDER = 3

MONOMIALS: tuple[tuple[int, int, int], ...] = tuple(
    alpha
    for degree in range(MAX_ORDER + 1)
    for alpha in sorted(
        (a for a in product(range(degree + 1), repeat=3) if sum(a) == degree),
        reverse=True,
    )
)
NCOEF = len(MONOMIALS)
_INDEX = {alpha: k for k, alpha in enumerate(MONOMIALS)}
DEGREE = np.array([sum(a) for a in MONOMIALS])
_FACTORIAL = np.array([math.prod(math.factorial(e) for e in a) for a in MONOMIALS], dtype=float)


def _build_tables():
    mul = np.zeros((MAX_ORDER + 1, NCOEF * NCOEF, NCOEF))
    for i, a in enumerate(MONOMIALS):
        for j, b in enumerate(MONOMIALS):
            s = (a[0] + b[0], a[1] + b[1], a[2] + b[2])
            if sum(s) <= MAX_ORDER:
                for order in range(sum(s), MAX_ORDER + 1):
                    mul[order, i * NCOEF + j, _INDEX[s]] = 1.0
    # diff[i, b, a]: coefficient a of f contributes to coefficient b of d_i f
    diff = np.zeros((3, NCOEF, NCOEF))
    for a_idx, a in enumerate(MONOMIALS):
        for i in range(3):
            if a[i] > 0:
                lowered = list(a)
                lowered[i] -= 1
                diff[i, _INDEX[tuple(lowered)], a_idx] = a[i]
    return mul, diff


_MUL, _DIFF = _build_tables()
_MASK = np.array([[1.0 if d <= order else 0.0 for d in DEGREE] for order in range(MAX_ORDER + 1)])


def _partial_index(*axes: int) -> tuple[int, float]:
    alpha = [0, 0, 0]
    for ax in axes:
        alpha[ax] += 1
    k = _INDEX[tuple(alpha)]
    return k, _FACTORIAL[k]


_D1_IDX = np.array([_partial_index(i)[0] for i in range(3)])
_D2_IDX = np.array([[_partial_index(i, j)[0] for j in range(3)] for i in range(3)])
_D2_FAC = np.array([[_partial_index(i, j)[1] for j in range(3)] for i in range(3)])
_D3_IDX = np.array(
    [[[_partial_index(i, j, k)[0] for k in range(3)] for j in range(3)] for i in range(3)]
)
_D3_FAC = np.array(
    [[[_partial_index(i, j, k)[1] for k in range(3)] for j in range(3)] for i in range(3)]
)

_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


class Jet3:
    """Immutable (possibly tensor-valued) order-3 jet in three variables."""

    __slots__ = ("coeffs", "order")
    __array_priority__ = 1000  # make ndarray * Jet3 defer to Jet3.__rmul__

    def __init__(self, coeffs, order: int = MAX_ORDER):
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"jet order must be in 0..{MAX_ORDER}, got {order}")
        c = np.array(coeffs, dtype=float)
        if c.shape[-1:] != (NCOEF,):
            raise ValueError(f"last axis must hold {NCOEF} coefficients, got shape {c.shape}")
        if order < MAX_ORDER:
            c = c * _MASK[order]
        c.flags.writeable = False
        self.coeffs = c
        self.order = order

    # -- construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, order: int = MAX_ORDER) -> "Jet3":
        v = np.asarray(value, dtype=float)
        c = np.zeros(v.shape + (NCOEF,))
        c[..., 0] = v
        return cls(c, order)

    @classmethod
    def from_partials(cls, value, d1=None, d2=None, d3=None, order: int | None = None) -> "Jet3":
        """Build a jet from point value and derivative arrays (trailing axes = derivative axes)."""
        v = np.asarray(value, dtype=float)
        c = np.zeros(v.shape + (NCOEF,))
        c[..., 0] = v
        given = 0
        if d1 is not None:
            d1 = np.asarray(d1, dtype=float)
            for i in range(3):
                c[..., _D1_IDX[i]] = d1[..., i]
            given = 1
        if d2 is not None:
            d2 = np.asarray(d2, dtype=float)
            for i in range(3):
                for j in range(i, 3):
                    c[..., _D2_IDX[i, j]] = d2[..., i, j] / _D2_FAC[i, j]
            given = 2
        if d3 is not None:
            d3 = np.asarray(d3, dtype=float)
            for i in range(3):
                for j in range(i, 3):
                    for k in range(j, 3):
                        c[..., _D3_IDX[i, j, k]] = d3[..., i, j, k] / _D3_FAC[i, j, k]
            given = 3
        return cls(c, given if order is None else order)

    @staticmethod
    def stack(jets: Sequence["Jet3"], axis: int = 0) -> "Jet3":
        jets = [as_jet(j) for j in jets]
        if axis < 0:
            raise ValueError("negative stack axis is ambiguous for jets")
        order = min(j.order for j in jets)
        shape = np.broadcast_shapes(*(j.shape for j in jets))
        arrs = [np.broadcast_to(j.coeffs, shape + (NCOEF,)) for j in jets]
        return Jet3(np.stack(arrs, axis=axis), order)

    # -- accessors --------------------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[:-1]

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[..., 0]

    @property
    def d1(self) -> np.ndarray:
        self._need(1)
        return self.coeffs[..., _D1_IDX]

    @property
    def d2(self) -> np.ndarray:
        self._need(2)
        return self.coeffs[..., _D2_IDX] * _D2_FAC

    @property
    def d3(self) -> np.ndarray:
        self._need(3)
        return self.coeffs[..., _D3_IDX] * _D3_FAC

    def partial(self, *axes: int) -> np.ndarray:
        """Partial derivative along the given coordinate axes (any order, symmetrized)."""
        self._need(len(axes))
        k, fac = _partial_index(*axes)
        return self.coeffs[..., k] * fac

    def _need(self, n: int) -> None:
        if n > self.order:
            raise ValueError(f"derivative of order {n} requested from a jet of order {self.order}")

    def __getitem__(self, key) -> "Jet3":
        if not isinstance(key, tuple):
            key = (key,)
        if any(k is Ellipsis for k in key):
            raise IndexError("Ellipsis indexing is not supported on jets")
        return Jet3(self.coeffs[key], self.order)

    def transpose(self, *axes: int) -> "Jet3":
        nd = len(self.shape)
        axes = axes or tuple(reversed(range(nd)))
        return Jet3(np.transpose(self.coeffs, tuple(axes) + (nd,)), self.order)

    @property
    def T(self) -> "Jet3":
        return self.transpose()

    def truncate(self, order: int) -> "Jet3":
        return Jet3(self.coeffs, min(order, self.order))

    def __repr__(self) -> str:
        return f"Jet3(shape={self.shape}, order={self.order}, value={self.value!r})"

    # -- arithmetic -------------------------------------------------------
    def __neg__(self) -> "Jet3":
        return Jet3(-self.coeffs, self.order)

    def __pos__(self) -> "Jet3":
        return self

    def __add__(self, other) -> "Jet3":
        if isinstance(other, Jet3):
            return Jet3(self.coeffs + other.coeffs, min(self.order, other.order))
        c = np.array(np.broadcast_to(self.coeffs, np.broadcast_shapes(self.shape, np.shape(other)) + (NCOEF,)))
        c[..., 0] += other
        return Jet3(c, self.order)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet3":
        return self + (-other)

    def __rsub__(self, other) -> "Jet3":
        return (-self) + other

    def __mul__(self, other) -> "Jet3":
        if isinstance(other, Jet3):
            return _truncated_product(self, other)
        return Jet3(self.coeffs * np.asarray(other, dtype=float)[..., None], self.order)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet3":
        if isinstance(other, Jet3):
            return self * reciprocal(other)
        other = np.asarray(other, dtype=float)
        if np.any(np.abs(other) < DIVISION_FLOOR):
            raise DivisionByZero("division by a value below the division floor")
        return Jet3(self.coeffs / other[..., None], self.order)

    def __rtruediv__(self, other) -> "Jet3":
        return reciprocal(self) * other

    def __pow__(self, k) -> "Jet3":
        return pow_const(self, k)

    def grad(self) -> "Jet3":
        """Gradient: a jet of order ``order - 1`` with a trailing axis of size 3."""
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        g = np.einsum("...a,iba->...ib", self.coeffs, _DIFF)
        return Jet3(g, self.order - 1)

    def derivative(self, axis: int) -> "Jet3":
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        return Jet3(self.coeffs @ _DIFF[axis].T, self.order - 1)


def as_jet(x) -> Jet3:
    return x if isinstance(x, Jet3) else Jet3.constant(x)


def _truncated_product(a: Jet3, b: Jet3) -> Jet3:
    order = min(a.order, b.order)
    outer = a.coeffs[..., :, None] * b.coeffs[..., None, :]
    flat = outer.reshape(outer.shape[:-2] + (NCOEF * NCOEF,))
    return Jet3(flat @ _MUL[order], order)


def contract(subscripts: str, a, b) -> Jet3:
    """``np.einsum`` over the tensor axes of two jets, with truncated products.

    ``subscripts`` uses lowercase letters only, e.g. ``"ij,jk->ik"``.
    """
    a, b = as_jet(a), as_jet(b)
    lhs, out = subscripts.replace(" ", "").split("->")
    sa, sb = lhs.split(",")
    order = min(a.order, b.order)
    pair = np.einsum(f"{sa}Y,{sb}Z->{out}YZ", a.coeffs, b.coeffs)
    flat = pair.reshape(pair.shape[:-2] + (NCOEF * NCOEF,))
    return Jet3(flat @ _MUL[order], order)


def einsum1(subscripts: str, a: Jet3) -> Jet3:
    """Linear index manipulation (trace, transpose, sum) of a single jet."""
    src, out = subscripts.replace(" ", "").split("->")
    return Jet3(np.einsum(f"{src}Z->{out}Z", a.coeffs), a.order)


def jet_variable(index: int, coords: Iterable[float], order: int = MAX_ORDER) -> Jet3:
    """The coordinate function ``x_index`` expanded at ``coords``."""
    if index not in (0, 1, 2):
        raise ValueError(f"variable index must be 0, 1 or 2, got {index!r}")
    coords = tuple(float(c) for c in coords)
    if len(coords) != 3:
        raise ValueError("coords must have three components")
    c = np.zeros(NCOEF)
    c[0] = coords[index]
    c[_D1_IDX[index]] = 1.0
    return Jet3(c, order)


def coordinate_jets(p: Iterable[float]) -> tuple[Jet3, Jet3, Jet3]:
    p = tuple(p)
    return jet_variable(0, p), jet_variable(1, p), jet_variable(2, p)


def jet_arith(op: str, a, b) -> Jet3:
    a, b = as_jet(a), as_jet(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown jet operation {op!r}")


def compose(a: Jet3, derivs: Sequence) -> Jet3:
    """Compose a univariate function with a jet.

    ``derivs`` lists ``f(a0), f'(a0), f''(a0), f'''(a0)`` (arrays broadcastable
    to ``a.shape``); the Taylor expansion in ``delta = a - a0`` is exact to the
    jet's order because ``delta`` has no constant term.
    """
    a = as_jet(a)
    delta = a - a.value
    result = Jet3.constant(derivs[0], a.order)
    power = None
    for k in range(1, a.order + 1):
        power = delta if power is None else power * delta
        result = result + power * (np.asarray(derivs[k], dtype=float) / math.factorial(k))
    return result


def reciprocal(b: Jet3) -> Jet3:
    b0 = b.value
    if np.any(np.abs(b0) < DIVISION_FLOOR):
        raise DivisionByZero("jet division by a value below the division floor")
    r = 1.0 / b0
    return compose(b, [r, -r**2, 2 * r**3, -6 * r**4])


def exp(a) -> Jet3:
    a = as_jet(a)
    e = np.exp(a.value)
    return compose(a, [e, e, e, e])


def ln(a) -> Jet3:
    a = as_jet(a)
    x = a.value
    if np.any(x <= 0):
        raise DomainError(f"ln of non-positive value {x!r}")
    return compose(a, [np.log(x), 1 / x, -1 / x**2, 2 / x**3])


def sqrt(a) -> Jet3:
    a = as_jet(a)
    x = a.value
    if np.any(x <= 0):
        raise DomainError(f"sqrt of non-positive value {x!r}")
    s = np.sqrt(x)
    return compose(a, [s, 0.5 / s, -0.25 / (x * s), 0.375 / (x * x * s)])


def sin(a) -> Jet3:
    a = as_jet(a)
    s, c = np.sin(a.value), np.cos(a.value)
    return compose(a, [s, c, -s, -c])


def cos(a) -> Jet3:
    a = as_jet(a)
    s, c = np.sin(a.value), np.cos(a.value)
    return compose(a, [c, -s, -c, s])


def pow_const(a, k: float) -> Jet3:
    a = as_jet(a)
    k = float(k)
    if k.is_integer() and k >= 0:
        n = int(k)
        result, base = Jet3.constant(np.ones(a.shape), a.order), a
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result
    x = a.value
    if k.is_integer():
        if np.any(np.abs(x) < DIVISION_FLOOR):
            raise DivisionByZero("negative integer power of zero")
    elif np.any(x <= 0):
        raise DomainError(f"non-integer power {k} of non-positive value {x!r}")
    return compose(a, [x**k, k * x ** (k - 1), k * (k - 1) * x ** (k - 2), k * (k - 1) * (k - 2) * x ** (k - 3)])


_ELEMENTARY = {"exp": exp, "ln": ln, "sqrt": sqrt, "sin": sin, "cos": cos}


def jet_elementary(f: str, a, k: float | None = None) -> Jet3:
    if f == "pow_const":
        if k is None:
            raise ValueError("pow_const needs an exponent")
        return pow_const(a, k)
    try:
        return _ELEMENTARY[f](a)
    except KeyError:
        raise ValueError(f"unknown elementary function {f!r}") from None


def matrix_inverse(m: Jet3) -> Jet3:
    """Inverse of a jet-valued square matrix via the Neumann series of its perturbation."""
    m0 = np.asarray(m.value)
    inv0 = np.linalg.inv(m0)
    delta = m - m0
    step = contract("ij,jk->ik", Jet3.constant(-inv0), delta)
    term = Jet3.constant(inv0, m.order)
    result = term
    for _ in range(m.order):
        term = contract("ij,jk->ik", step, term)
        result = result + term
    return result


def antiderivative(a: Jet3, axis: int, value) -> Jet3:
    """Jet of F with F(p) = ``value`` and d_axis F = a, for ``a`` depending on that axis only.

    Coefficients of ``a`` involving other variables are ignored; the result
    gains one order (capped at 3).
    """
    c = np.zeros(a.shape + (NCOEF,))
    c[..., 0] = value
    for k, alpha in enumerate(MONOMIALS):
        if alpha[axis] >= 1 and sum(alpha) == alpha[axis]:
            lower = list(alpha)
            lower[axis] -= 1
            c[..., k] = a.coeffs[..., _INDEX[tuple(lower)]] / alpha[axis]
    return Jet3(c, min(MAX_ORDER, a.order + 1))
