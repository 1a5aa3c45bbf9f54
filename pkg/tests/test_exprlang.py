import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cosyflat.errors import DomainError, ParseError
from cosyflat.exprlang import Binary, Call, Const, Unary, Var, eval_expr, parse_expr, to_source, variables

from fdcheck import fd_relative_error


def test_variable():
    assert parse_expr("z") == Var("z")


def test_exp_call():
    assert parse_expr("exp(1*x)") == Call("exp", Binary("*", Const(1.0), Var("x")))


@pytest.mark.parametrize(
    "src,offset",
    [("z^", 2), ("", 0), ("(x", 2), ("x +", 3), ("foo(x)", 0), ("x y", 2), ("2x", 1), ("z^x", 2)],
)
def test_parse_errors(src, offset):
    with pytest.raises(ParseError) as info:
        parse_expr(src)
    assert info.value.offset == offset
    assert info.value.expected


def test_non_ascii_rejected():
    with pytest.raises(ParseError):
        parse_expr("x·z")


def test_power_binds_tighter_than_minus():
    assert parse_expr("-z^2") == Unary("-", Binary("^", Var("z"), Const(2.0)))
    assert eval_expr(parse_expr("-z^2"), (0, 0, 3)).value == -9


def test_whitespace_insensitive():
    assert parse_expr(" exp ( x ) * z ") == parse_expr("exp(x)*z")


def test_eval_square():
    j = eval_expr(parse_expr("z*z"), (0, 0, 3))
    assert j.value == 9 and j.partial(2) == 6


def test_eval_exp_over_z():
    # sympy oracle: exp(x)/z at (0,0,2) -> 1/2, d_x 1/2, d_z -1/4
    j = eval_expr(parse_expr("exp(x)/z"), (0, 0, 2))
    assert j.value == pytest.approx(0.5, abs=1e-15)
    assert j.partial(0) == pytest.approx(0.5, abs=1e-15)
    assert j.partial(2) == pytest.approx(-0.25, abs=1e-15)


def test_ln_domain():
    with pytest.raises(DomainError):
        eval_expr(parse_expr("ln(z)"), (0, 0, -1))


def test_variables():
    assert variables(parse_expr("x*sin(z)+2")) == {"x", "z"}


# random well-formed sources
_leaf = st.sampled_from(["x", "y", "z", "1", "2.5", "0.5"])


def _combine(children):
    return st.one_of(
        st.tuples(children, st.sampled_from("+-*/"), children).map(lambda t: f"({t[0]}{t[1]}{t[2]})"),
        st.tuples(st.sampled_from(["sin", "cos", "exp"]), children).map(lambda t: f"{t[0]}({t[1]})"),
        children.map(lambda c: f"-{c}"),
        st.tuples(children, st.integers(0, 3)).map(lambda t: f"({t[0]})^{t[1]}"),
    )


sources = st.recursive(_leaf, _combine, max_leaves=8)


@settings(max_examples=200, deadline=None)
@given(sources)
def test_round_trip(src):
    ast = parse_expr(src)
    assert parse_expr(to_source(ast)) == ast


@settings(max_examples=100, deadline=None)
@given(sources, st.tuples(*[st.floats(0.2, 0.9)] * 3))
def test_partials_match_finite_differences(src, p):
    ast = parse_expr(src)
    try:
        centre = eval_expr(ast, p)
    except (DomainError, ZeroDivisionError):
        return
    if not np.all(np.isfinite(centre.coeffs)) or np.max(np.abs(centre.coeffs)) > 1e6:
        return
    try:
        err = fd_relative_error(lambda q: eval_expr(ast, q), p)
    except (DomainError, ZeroDivisionError):
        return
    if math.isfinite(err):
        assert err < 1e-5
