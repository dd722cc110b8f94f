import csv
import io
import json
import math

import pytest

from pantograph.cli import main, router


def run(*argv):
    stdout, stderr = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=stdout, stderr=stderr)
    return code, stdout.getvalue(), stderr.getvalue()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_commands_are_registered():
    assert router.names == ["eval", "table", "solve", "stability", "check"]


def test_eval_exp():
    code, stdout, _ = run("eval", "--a", "1", "--q", "1", "--x", "1")
    assert code == 0
    header, row = stdout.splitlines()
    assert header == "x,value,terms_used,tail_bound"
    assert row.startswith("1,2.718281828459045,")


def test_eval_half_spec():
    code, stdout, _ = run("eval", "--a", "0.5,0.5", "--q", "1,0.5", "--x", "1", "--tol", "1e-12")
    assert code == 0
    (row,) = rows(stdout)
    assert float(row["value"]) == pytest.approx(2.465387, abs=1e-6)
    assert float(row["tail_bound"]) <= 1e-12


def test_eval_negative_leading_coefficient():
    code, stdout, _ = run("eval", "--a", "-0.5,0.25", "--q", "1,0.5", "--x", "1")
    assert code == 0
    (row,) = rows(stdout)
    assert float(row["value"]) == pytest.approx(0.7908, abs=1e-3)


def test_eval_vanishing_coefficients_with_large_argument():
    """Ensures a huge majorant with an exactly terminating series still evaluates"""
    code, stdout, _ = run("eval", "--a", "400,-400", "--q", "1,0.5", "--x", "2")
    assert code == 0
    (row,) = rows(stdout)
    assert float(row["value"]) == 1.0
    assert float(row["tail_bound"]) == 0.0


def test_eval_fractional():
    code, stdout, _ = run("eval", "--a", "1", "--x", "1", "--alpha", "0.5")
    assert code == 0
    assert float(rows(stdout)[0]["value"]) == pytest.approx(5.00898, abs=1e-4)


def test_eval_invalid_ratio_is_a_domain_error():
    code, _, stderr = run("eval", "--a", "0.5,0.5", "--q", "1,1.5", "--x", "1")
    assert code == 2
    assert "q[1]" in stderr


def test_eval_malformed_list_names_token():
    code, _, stderr = run("eval", "--a", "0.5,x", "--q", "1,0.5", "--x", "1")
    assert code == 1
    assert "'x'" in stderr


def test_eval_truncation_exit_code():
    # terms 1 / Gamma(m / 1000 + 1) decay too slowly for the default term budget
    code, _, stderr = run("eval", "--a", "1", "--x", "1", "--alpha", "0.001")
    assert code == 3
    assert "tail bound" in stderr


def test_table_rows_are_sandwiched():
    code, stdout, _ = run("table", "--a", "0.5,0.5", "--q", "1,0.5", "--x0", "0", "--x1", "1", "--steps", "4")
    assert code == 0
    table = rows(stdout)
    assert len(table) == 5
    for row in table:
        assert float(row["lower_bound"]) <= float(row["R"]) <= float(row["upper_bound"])


def test_table_single_step_emits_endpoints():
    _, stdout, _ = run("table", "--a", "1", "--x0", "0", "--x1", "2", "--steps", "1")
    assert [row["x"] for row in rows(stdout)] == ["0", "2"]


def test_table_mixed_signs_leave_bounds_empty():
    _, stdout, _ = run("table", "--a", "0.5,-0.5", "--q", "1,0.5", "--x0", "0", "--x1", "1", "--steps", "2")
    for row in rows(stdout):
        assert row["lower_bound"] == row["upper_bound"] == ""


def test_table_fractional_bounds():
    _, stdout, _ = run(
        "table", "--a", "0.5,0.5", "--q", "1,0.5", "--x0", "0", "--x1", "1", "--steps", "2", "--alpha", "0.5"
    )
    for row in rows(stdout):
        assert float(row["lower_bound"]) <= float(row["R"]) <= float(row["upper_bound"])


def test_csv_rows_round_trip():
    _, stdout, _ = run("table", "--a", "0.3,0.7", "--q", "1,0.1", "--x0", "0", "--x1", "3", "--steps", "7")
    _, as_json, _ = run(
        "table", "--a", "0.3,0.7", "--q", "1,0.1", "--x0", "0", "--x1", "3", "--steps", "7", "--format", "json"
    )
    payload = json.loads(as_json)
    assert payload["status"] == "success"
    for csv_row, json_row in zip(rows(stdout), payload["result"]["rows"]):
        assert float(csv_row["R"]) == json_row["R"]
        assert float(csv_row["x"]) == json_row["x"]


def test_solve_rk4():
    code, stdout, _ = run("solve", "--a", "1", "--q", "1", "--b", "1", "--N", "64", "--engine", "rk4")
    assert code == 0
    table = rows(stdout)
    assert len(table) == 65
    assert float(table[-1]["y"]) == pytest.approx(math.e, abs=1e-8)


def test_solve_compare_engines():
    code, stdout, _ = run("solve", "--a", "0.5,0.5", "--q", "1,0.5", "--b", "1", "--N", "512", "--compare")
    assert code == 0
    assert max(float(row["abs_diff"]) for row in rows(stdout)) <= 1e-4


def test_solve_expression_needs_lipschitz():
    code, _, stderr = run("solve", "--rhs", "y1^2", "--q", "1,0.5", "--b", "0.5")
    assert code == 1
    assert "--lipschitz" in stderr


def test_solve_expression():
    code, stdout, _ = run(
        "solve", "--rhs", "-y1^2", "--q", "1,0.5", "--b", "0.5", "--N", "64",
        "--lipschitz", "0,4", "--bound", "4",
    )
    assert code == 0
    assert float(rows(stdout)[-1]["y"]) == pytest.approx(0.6068, abs=5e-3)


def test_solve_grammar_error_reports_position():
    code, _, stderr = run("solve", "--rhs", "y1 +* 2", "--q", "1,0.5", "--lipschitz", "0,1")
    assert code == 1
    assert "at position 4" in stderr


def test_solve_rectangle_escape_exit_code():
    code, _, _ = run(
        "solve", "--rhs", "y0^2", "--q", "1", "--b", "2", "--N", "64",
        "--lipschitz", "4", "--bound", "4", "--delta", "1",
    )
    assert code == 4


def test_solve_rk4_refuses_expression():
    code, _, _ = run("solve", "--rhs", "y0", "--q", "1", "--engine", "rk4", "--lipschitz", "1")
    assert code == 1


def test_stability_decay_json():
    code, stdout, _ = run("stability", "--a", "-1", "--q", "1", "--x0", "0", "--format", "json")
    assert code == 0
    result = json.loads(stdout)["result"]
    assert result["verdict"] == "stable-on-finite-interval"
    assert result["roots"] == [{"re": pytest.approx(-1.0), "im": 0.0}]
    assert set(result["window"]) == {"re_min", "re_max", "im_max"}


def test_stability_lagged_decay():
    code, stdout, _ = run("stability", "--a", "0,-1", "--q", "1,0.5", "--x0", "2")
    assert code == 0
    table = rows(stdout)
    assert float(table[0]["max_real_part"]) == pytest.approx(-0.3181, abs=5e-3)
    assert {row["verdict"] for row in table} == {"stable-on-finite-interval"}


def test_stability_growth_is_unstable():
    code, stdout, _ = run("stability", "--a", "1", "--q", "1", "--x0", "0", "--format", "json")
    assert code == 0
    assert json.loads(stdout)["result"]["verdict"] == "unstable"


def test_stability_inconclusive_is_not_an_error():
    code, stdout, _ = run("stability", "--a", "-1", "--x0", "0", "--re-max", "0.5", "--im-max", "0.5")
    assert code == 0
    assert rows(stdout)[0]["verdict"] == "inconclusive"


def test_stability_needs_freeze_point():
    code, _, stderr = run("stability", "--a", "-1")
    assert code == 1
    assert "--x0" in stderr


def test_check_sweep_is_clean():
    code, stdout, _ = run("check", "--seed", "7", "--samples", "20")
    assert code == 0
    table = rows(stdout)
    assert {row["property"] for row in table} == {
        "exp_degeneration",
        "ode_residual",
        "addition_theorem",
        "sandwich",
    }
    assert all(row["violations"] == "0" for row in table)
    assert all(row["checked"] == "20" for row in table)


def test_config_file(tmp_path):
    path = tmp_path / "exp.conf"
    path.write_text("a=1\nq=1\nx=0.5\n")
    code, stdout, _ = run("eval", "--config", str(path), "--x", "1")
    assert code == 0
    assert rows(stdout)[0]["x"] == "1"
