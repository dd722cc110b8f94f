import io
import json

import pytest
from pydantic import ValidationError

from pantograph.delay_spec import DelaySpec
from pantograph.errors import ConvergenceError, RectangleEscapeError, TruncationError, UsageError
from pantograph.exception_handler import exit_code_for, pantograph_exception_handler
from pantograph.report import Table, format_cell, write_table


@pytest.mark.parametrize(
    "value, text",
    [(1.0, "1"), (0.1, "0.1"), (2.718281828459045, "2.718281828459045"), (None, ""), (7, "7"), ("stable", "stable")],
    ids=["integral-float", "short-float", "e", "missing", "int", "str"],
)
def test_format_cell(value, text):
    assert format_cell(value) == text


def test_table_append_checks_width():
    table = Table(columns=["x", "y"])
    with pytest.raises(ValueError):
        table.append(1.0)


def test_write_table_csv_and_json_carry_same_values():
    table = Table(columns=["x", "value"])
    table.append(0.5, 1 / 3)
    table.append(1.0, None)

    as_csv, as_json = io.StringIO(), io.StringIO()
    write_table(table, as_csv, as_json=False)
    write_table(table, as_json, as_json=True)

    assert as_csv.getvalue() == f"x,value\n0.5,{1 / 3!r}\n1,\n"
    payload = json.loads(as_json.getvalue())
    assert payload["status"] == "success"
    assert payload["result"]["rows"] == [{"x": 0.5, "value": 1 / 3}, {"x": 1.0, "value": None}]


@pytest.mark.parametrize(
    "exc, code",
    [
        (UsageError("bad flag"), 1),
        (TruncationError("slow", 1e-3), 3),
        (ConvergenceError("slow", 1e-3), 3),
        (RectangleEscapeError("escaped"), 4),
    ],
    ids=["usage", "truncation", "convergence", "escape"],
)
def test_exit_codes(exc, code):
    assert exit_code_for(exc) == code


def test_validation_errors_are_domain_errors():
    with pytest.raises(ValidationError) as excinfo:
        DelaySpec.of([1.0, 1.0], [1.0, 2.0])
    assert exit_code_for(excinfo.value) == 2


def test_handler_writes_plain_and_json_reports():
    plain, as_json = io.StringIO(), io.StringIO()
    assert pantograph_exception_handler(RectangleEscapeError("left"), plain, as_json=False) == 4
    assert plain.getvalue() == "error: left\n"
    assert pantograph_exception_handler(RectangleEscapeError("left"), as_json, as_json=True) == 4
    assert json.loads(as_json.getvalue()) == {"detail": "left", "status": "error", "exit_code": 4}


def test_handler_reraises_unexpected_errors():
    with pytest.raises(ZeroDivisionError):
        pantograph_exception_handler(ZeroDivisionError(), io.StringIO(), as_json=False)
