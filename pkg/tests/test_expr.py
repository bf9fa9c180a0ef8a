"""Expression language: parsing, evaluation, pretty-printing."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from couplefix.errors import ExprEvalError, ExprSyntaxError
from couplefix.expr import (
    Arm,
    BinOp,
    BoolOp,
    Call,
    Comparison,
    Neg,
    Number,
    Piecewise,
    Var,
    bind_function,
    eval_expression,
    format_expression,
    free_variables,
    parse_expression,
)

MIN_XY = "min(x, y)"
F_PIECEWISE = "piecewise { 0 <= x and x <= 2 and 0 <= y and y <= 2 => 2 ; else => (x + y)/24 ; }"
T_PIECEWISE = "piecewise { 0 <= x and x <= 2 => 2 ; x > 2 => 4 ; }"
PHI_CAPPED = "piecewise { t <= 47/24 => 2/3 * t ; else => 47/24 ; }"


# ---------------------------------------------------------------------------
# parsing


def test_parse_min_call():
    ast = parse_expression("min(x,y)")
    assert ast == Call("min", (Var("x"), Var("y")))


def test_parse_two_arm_piecewise_with_else():
    ast = parse_expression("piecewise { 0 <= x and x <= 2 => 2; else => 4 }")
    assert isinstance(ast, Piecewise)
    assert len(ast.arms) == 1
    assert ast.otherwise == Number(Fraction(4))
    guard = ast.arms[0].guard
    assert isinstance(guard, BoolOp) and guard.op == "and"


def test_parse_error_unbalanced_call():
    with pytest.raises(ExprSyntaxError) as err:
        parse_expression("min(x")
    assert err.value.line == 1
    assert set(err.value.expected) >= {")", ","}


def test_parse_error_reports_position():
    with pytest.raises(ExprSyntaxError) as err:
        parse_expression("x +\n* 2")
    assert err.value.line == 2
    assert err.value.column == 1


def test_unknown_identifier_rejected():
    with pytest.raises(ExprSyntaxError):
        parse_expression("z + 1")
    with pytest.raises(ExprSyntaxError):
        parse_expression("foo(x)")


def test_arity_errors():
    with pytest.raises(ExprSyntaxError):
        parse_expression("abs(x, y)")
    with pytest.raises(ExprSyntaxError):
        parse_expression("min(x)")


def test_empty_text_rejected():
    with pytest.raises(ExprSyntaxError):
        parse_expression("   ")


def test_rational_literal_is_a_single_number():
    ast = parse_expression("47/24")
    assert ast == Number(Fraction(47, 24))


def test_spaced_division_stays_a_binop():
    ast = parse_expression("47 / 24")
    assert ast == BinOp("/", Number(Fraction(47)), Number(Fraction(24)))


def test_decimal_literal_is_exact():
    assert parse_expression("0.1") == Number(Fraction(1, 10))


def test_precedence_and_unary_minus():
    assert parse_expression("2*x + y") == BinOp(
        "+", BinOp("*", Number(Fraction(2)), Var("x")), Var("y")
    )
    assert parse_expression("-x * y") == BinOp("*", Neg(Var("x")), Var("y"))
    assert parse_expression("2*(x + y)") == BinOp(
        "*", Number(Fraction(2)), BinOp("+", Var("x"), Var("y"))
    )


def test_piecewise_only_at_top_level():
    with pytest.raises(ExprSyntaxError):
        parse_expression("1 + piecewise { x > 0 => 1 ; }")


# ---------------------------------------------------------------------------
# evaluation


def test_eval_elsewhere_branch():
    # at x=1, y=3 the boxed guard fails, so (1+3)/24 = 1/6
    ast = parse_expression(F_PIECEWISE)
    assert eval_expression(ast, {"x": 1.0, "y": 3.0}) == pytest.approx(1 / 6, abs=1e-15)
    assert eval_expression(ast, {"x": 1.0, "y": 1.0}) == 2.0


def test_eval_capped_control_at_two():
    ast = parse_expression(PHI_CAPPED)
    assert eval_expression(ast, {"t": 2.0}) == pytest.approx(float(Fraction(47, 24)), abs=1e-16)
    assert eval_expression(ast, {"t": 1.0}) == pytest.approx(2 / 3, abs=1e-15)


def test_eval_square():
    ast = parse_expression("t*t")
    assert eval_expression(ast, {"t": 1.0}) == 1.0
    assert eval_expression(ast, {"t": 3.0}) == 9.0


def test_eval_unbound_variable():
    ast = parse_expression("x + t")
    with pytest.raises(ExprEvalError):
        eval_expression(ast, {"x": 1.0})


def test_eval_division_by_zero():
    ast = parse_expression("1 / (x - x)")
    with pytest.raises(ExprEvalError):
        eval_expression(ast, {"x": 3.0})


def test_eval_no_arm_fires():
    ast = parse_expression("piecewise { x < 0 => 1 ; }")
    with pytest.raises(ExprEvalError):
        eval_expression(ast, {"x": 1.0})


def test_piecewise_first_match_wins():
    ast = parse_expression("piecewise { x <= 2 => 1 ; x <= 4 => 2 ; }")
    assert eval_expression(ast, {"x": 2.0}) == 1.0
    assert eval_expression(ast, {"x": 3.0}) == 2.0


def test_guard_or_chain():
    ast = parse_expression("piecewise { x < 0 or x > 1 => 0 ; else => x ; }")
    assert eval_expression(ast, {"x": 2.0}) == 0.0
    assert eval_expression(ast, {"x": 0.5}) == 0.5


def test_free_variables():
    assert free_variables(parse_expression(F_PIECEWISE)) == {"x", "y"}
    assert free_variables(parse_expression("t*t")) == {"t"}


def test_bind_function_checks_arity():
    f = bind_function(parse_expression(MIN_XY), ("x", "y"))
    assert f(2.0, 5.0) == 2.0
    with pytest.raises(ExprEvalError):
        bind_function(parse_expression("x + y"), ("t",))


# ---------------------------------------------------------------------------
# pretty-printing round trips


@pytest.mark.parametrize(
    "text",
    [
        MIN_XY,
        F_PIECEWISE,
        T_PIECEWISE,
        PHI_CAPPED,
        "t*t",
        "1 / (x - x)",
        "-x * y - 2",
        "abs(x - y) + max(x, y, 1/2)",
        "2*(x + y)",
        "x - (y - 1)",
        "piecewise { x < 0 or x > 1 => 0 ; else => x ; }",
    ],
)
def test_round_trip_examples(text):
    ast = parse_expression(text)
    assert parse_expression(format_expression(ast)) == ast


# hypothesis strategy over grammatically expressible ASTs

_numbers = st.fractions(min_value=0, max_value=100, max_denominator=50).map(Number)
_vars = st.sampled_from(["x", "y", "t"]).map(Var)


def _arith(depth):
    if depth <= 0:
        return st.one_of(_numbers, _vars)
    sub = _arith(depth - 1)
    return st.one_of(
        _numbers,
        _vars,
        st.builds(Neg, sub),
        st.builds(BinOp, st.sampled_from(["+", "-", "*", "/"]), sub, sub),
        st.builds(
            lambda f, args: Call(f, tuple(args)),
            st.sampled_from(["min", "max"]),
            st.lists(sub, min_size=2, max_size=3),
        ),
        st.builds(lambda a: Call("abs", (a,)), sub),
    )


def _guards(depth):
    cmp = st.builds(
        Comparison,
        _arith(depth),
        st.sampled_from(["<=", "<", ">=", ">", "=="]),
        _arith(depth),
    )
    # grammar only allows left-leaning and/or chains of comparisons
    return st.lists(st.tuples(st.sampled_from(["and", "or"]), cmp), max_size=2).flatmap(
        lambda tail: cmp.map(
            lambda head: _chain(head, tail)
        )
    )


def _chain(head, tail):
    node = head
    for op, nxt in tail:
        node = BoolOp(op, node, nxt)
    return node


_expressions = st.one_of(
    _arith(2),
    st.builds(
        lambda arms, otherwise: Piecewise(tuple(arms), otherwise),
        st.lists(st.builds(Arm, _guards(1), _arith(1)), min_size=1, max_size=3),
        st.one_of(st.none(), _arith(1)),
    ),
)


@settings(max_examples=300, deadline=None)
@given(_expressions)
def test_round_trip_property(ast):
    """format -> parse is the identity on expressible ASTs."""
    assert parse_expression(format_expression(ast)) == ast
