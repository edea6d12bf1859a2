import numpy as np
import pytest
from numpy.testing import assert_allclose

from dtnlab.errors import ExpressionError
from dtnlab.expressions import Func, parse_expression


def test_basic_arithmetic_and_precedence():
    e = parse_expression("1+2*3-4/2")
    assert_allclose(e.evaluate(np.zeros(1)), [5.0])
    e = parse_expression("(1+2)*3")
    assert_allclose(e.evaluate(np.zeros(1)), [9.0])


def test_variables_and_pi():
    e = parse_expression("2+sin(2*pi*x)")
    x = np.array([0.0, 0.25, 0.5])
    assert_allclose(e.evaluate(x), 2.0 + np.sin(2 * np.pi * x), atol=1e-15)
    assert e.uses() == {"x"}
    assert e.function_nodes() == 1


def test_two_dimensional_expression():
    e = parse_expression("1+x*y")
    x = np.array([0.0, 0.5, 1.0])
    y = np.array([1.0, 2.0, 3.0])
    assert_allclose(e.evaluate(x, y), 1.0 + x * y)


def test_unary_minus_and_nesting():
    e = parse_expression("-x*-2")
    assert_allclose(e.evaluate(np.array([3.0])), [6.0])
    e = parse_expression("exp(-abs(x))")
    assert_allclose(e.evaluate(np.array([-2.0])), [np.exp(-2.0)])


def test_functions_require_parentheses():
    with pytest.raises(ExpressionError):
        parse_expression("sin x")


def test_malformed_reports_column():
    with pytest.raises(ExpressionError) as err:
        parse_expression("2+*3")
    assert err.value.column == 3  # the '*' sits at column 3


def test_unknown_name_reports_column():
    with pytest.raises(ExpressionError) as err:
        parse_expression("2+zeta")
    assert err.value.column == 3


def test_trailing_input_rejected():
    with pytest.raises(ExpressionError):
        parse_expression("1+1 1")


def test_unexpected_character_column():
    with pytest.raises(ExpressionError) as err:
        parse_expression("1 + $")
    assert err.value.column == 5


def test_ast_is_inspectable():
    e = parse_expression("sin(cos(x))")
    assert isinstance(e.ast, Func)
    assert e.function_nodes() == 2


def test_scientific_notation_numbers():
    e = parse_expression("1.5e-3+2E2")
    assert_allclose(e.evaluate(np.zeros(1)), [0.0015 + 200.0])
