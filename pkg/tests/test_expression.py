import math

import pytest

from pantograph.errors import ExpressionError, UsageError
from pantograph.expression import parse_expression, tokenize


@pytest.mark.parametrize(
    "source, args, expected",
    [
        ("1 + 2 * 3", (0.0, 0.0), 7.0),
        ("(1 + 2) * 3", (0.0, 0.0), 9.0),
        ("2 ^ 3 ^ 2", (0.0, 0.0), 512.0),
        ("-y0^2", (0.0, 3.0), -9.0),
        ("x * y0 - y1 / 4", (2.0, 1.5, 2.0), 2.5),
        ("sin(x) + cos(0) + exp(y0)", (0.0, 0.0), 2.0),
        ("1.5e1 - .5", (0.0, 0.0), 14.5),
        ("--y0", (0.0, 4.0), 4.0),
    ],
    ids=["precedence", "parentheses", "right-assoc-power", "power-before-negation", "symbols", "functions", "number-forms", "double-negation"],
)
def test_evaluation(source, args, expected):
    assert parse_expression(source)(*args) == pytest.approx(expected)


@pytest.mark.parametrize(
    "source, position",
    [
        ("y0 +", 4),
        ("y0 $ 1", 3),
        ("(y0 + 1", 7),
        ("foo(y0)", 0),
        ("2 y0", 2),
        ("", 0),
        ("sin y0", 4),
    ],
    ids=["dangling-operator", "bad-character", "unclosed-paren", "unknown-function", "juxtaposition", "empty", "function-without-paren"],
)
def test_grammar_errors_carry_position(source, position):
    with pytest.raises(ExpressionError) as excinfo:
        parse_expression(source)
    assert excinfo.value.position == position
    assert f"at position {position}" in str(excinfo.value)


def test_grammar_errors_are_usage_errors():
    assert issubclass(ExpressionError, UsageError)
    assert ExpressionError.exit_code == 1


def test_symbols_beyond_last_delay_are_rejected():
    with pytest.raises(ExpressionError) as excinfo:
        parse_expression("y0 + y2", n_delays=1)
    assert excinfo.value.position == 5


def test_highest_argument_is_recorded():
    expression = parse_expression("x + y3")
    assert expression.highest_argument == 3
    assert expression.uses_x


def test_too_few_arguments():
    with pytest.raises(ValueError):
        parse_expression("y1")(0.0, 1.0)


@pytest.mark.parametrize(
    "source, args",
    [("1 / y0", (0.0, 0.0)), ("y0 ^ 0.5", (0.0, -1.0)), ("exp(y0)", (0.0, 1e6))],
    ids=["division-by-zero", "complex-power", "overflow"],
)
def test_arithmetic_faults_evaluate_to_nan(source, args):
    assert math.isnan(parse_expression(source)(*args))


def test_tokenize_positions():
    tokens = tokenize(" y0*  2")
    assert [(t.kind, t.text, t.position) for t in tokens] == [
        ("name", "y0", 1),
        ("op", "*", 3),
        ("number", "2", 6),
        ("end", "", 7),
    ]
