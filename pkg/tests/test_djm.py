import math

import numpy as np
import pytest
from pydantic import ValidationError

from pantograph.delay_spec import DelaySpec
from pantograph.djm import (
    DelayRHS,
    apriori_bound,
    certified_remainder,
    djm_iterate,
    djm_symbolic_linear_terms,
    solution_bound,
)
from pantograph.errors import ConvergenceError, DomainError, RectangleEscapeError
from pantograph.expression import parse_expression
from pantograph.series import evaluate
from tests.strategies import seeded_specs


def trapezoid_allowance(spec: DelaySpec, b: float, N: int) -> float:
    """quadrature error of the grid iteration on top of the certified series remainder"""
    growth = max(spec.abs_sum, 1.0)
    return 0.5 * (b / N) ** 2 * growth**3 * b * math.exp(spec.abs_sum * b)


def test_linear_rhs_matches_exponential(exp_spec):
    """Ensures the grid iterate for y' = y tracks e^x within the certified error plus quadrature error"""
    b, N = 1.0, 512
    solution = djm_iterate(DelayRHS.linear(exp_spec, b), N=N)
    error = np.max(np.abs(solution.values - np.exp(solution.nodes)))
    assert error <= solution.certified_error + trapezoid_allowance(exp_spec, b, N)
    assert solution.values[0] == 1.0


def test_linear_rhs_matches_series(half_spec):
    solution = djm_iterate(DelayRHS.linear(half_spec, 1.0), N=512, tol=1e-10)
    assert solution.at_end() == pytest.approx(2.465387, abs=1e-4)
    assert solution.at_end() == pytest.approx(evaluate(half_spec, 1.0).value, abs=1e-5)


def test_zero_rhs_stops_after_one_increment():
    rhs = DelayRHS(q=(1.0,), f=lambda x, y: 0.0, lipschitz=(0.0,), bound_M=1.0, b=1.0, delta=(1.0,))
    solution = djm_iterate(rhs, y0=2.5, N=32)
    assert solution.iteration_count == 1
    assert solution.certified_error == 0.0
    assert np.all(solution.values == 2.5)


def test_increment_norms_obey_apriori_bound(half_spec):
    rhs = DelayRHS.linear(half_spec, 1.0)
    solution = djm_iterate(rhs, N=256)
    for m, norm in enumerate(solution.increment_norms, start=1):
        assert norm <= apriori_bound(rhs, m) * (1 + 1e-9)


@pytest.mark.parametrize("spec", seeded_specs(seed=23, count=5), ids=[f"seeded-{i}" for i in range(5)])
def test_increment_norms_obey_apriori_bound_on_seeded_specs(spec):
    rhs = DelayRHS.linear(spec, 1.0)
    solution = djm_iterate(rhs, N=256)
    for m, norm in enumerate(solution.increment_norms, start=1):
        assert norm <= apriori_bound(rhs, m) * (1 + 1e-9)


@pytest.mark.parametrize(
    "spec", seeded_specs(seed=29, count=5, nonnegative=True), ids=[f"seeded-{i}" for i in range(5)]
)
def test_increments_decay_geometrically(spec):
    """Ensures |y_{m+1}| / |y_m| <= 1.5 (sum L_i) b / (m + 1) while the increments are above rounding"""
    b = 1.0
    rhs = DelayRHS.linear(spec, b)
    norms = djm_iterate(rhs, N=256).increment_norms
    for m, (norm, following) in enumerate(zip(norms, norms[1:]), start=1):
        if norm > 1e-13:
            assert following / norm <= 1.5 * rhs.lipschitz_sum * b / (m + 1)


def test_nonlinear_rhs_from_expression():
    """y' = -y(x/2)^2 follows its Taylor polynomial 1 - x + x^2/2 - x^3/6 + x^4/24 near 0"""
    rhs = DelayRHS(
        q=(1.0, 0.5),
        f=parse_expression("-y1^2", n_delays=1),
        lipschitz=(0.0, 4.0),
        bound_M=4.0,
        b=0.5,
        delta=(1.0, 1.0),
    )
    solution = djm_iterate(rhs, N=256)
    assert solution.at_end() < 1.0
    x = 0.5
    assert solution.at_end() == pytest.approx(1 - x + x**2 / 2 - x**3 / 6 + x**4 / 24, abs=5e-3)


def test_rectangle_escape_is_reported():
    """y' = y^2 blows up at x = 1, so the iterates leave |y - 1| <= 1 on [0, 2]"""
    rhs = DelayRHS(
        q=(1.0,), f=parse_expression("y0^2"), lipschitz=(4.0,), bound_M=4.0, b=2.0, delta=(1.0,)
    )
    with pytest.raises(RectangleEscapeError) as excinfo:
        djm_iterate(rhs, N=64)
    assert "y0" in str(excinfo.value)


def test_non_convergence_carries_last_norm(exp_spec):
    with pytest.raises(ConvergenceError) as excinfo:
        djm_iterate(DelayRHS.linear(exp_spec, 1.0), N=64, max_iter=3)
    assert excinfo.value.increment_norm > 1e-10


def test_initial_iterate_reaches_same_solution(half_spec):
    rhs = DelayRHS.linear(half_spec, 1.0)
    plain = djm_iterate(rhs, N=128)
    guess = np.exp(np.linspace(0.0, 1.0, 129) * 0.8)
    seeded = djm_iterate(rhs, N=128, initial_iterate=guess)
    assert seeded.values == pytest.approx(plain.values, abs=1e-8)


def test_initial_iterate_must_start_at_initial_value(half_spec):
    with pytest.raises(DomainError):
        djm_iterate(DelayRHS.linear(half_spec, 1.0), N=16, initial_iterate=np.full(17, 2.0))


def test_grid_must_not_be_too_coarse(exp_spec):
    with pytest.raises(DomainError):
        djm_iterate(DelayRHS.linear(exp_spec, 1.0), N=8)


@pytest.mark.parametrize(
    "a, q, m, expected",
    [
        ([1.0], [1.0], 3, 1.0),
        ([0.5, 0.5], [1.0, 0.5], 2, 0.75),
        ([0.5, 0.5], [1.0, 0.5], 4, 0.263671875),
    ],
    ids=["exp", "half-m2", "half-m4"],
)
def test_symbolic_linear_terms(a, q, m, expected):
    assert djm_symbolic_linear_terms(DelaySpec.of(a, q), m) == expected


def _rhs(bound_M, lipschitz, b):
    q = (1.0, 0.5)[: len(lipschitz)]
    return DelayRHS(
        q=q, f=lambda x, *ys: 0.0, lipschitz=lipschitz, bound_M=bound_M, b=b, delta=(1.0,) * len(q)
    )


@pytest.mark.parametrize(
    "bound_M, lipschitz, b, m, expected",
    [
        (1.0, (1.0,), 1.0, 3, 1 / 6),
        (2.0, (0.5, 0.5), 2.0, 2, 4.0),
        (3.0, (0.0,), 2.0, 1, 6.0),
        (3.0, (0.0,), 2.0, 2, 0.0),
    ],
    ids=["unit", "two-delays", "constant-rhs-first", "constant-rhs-later"],
)
def test_apriori_bound(bound_M, lipschitz, b, m, expected):
    assert apriori_bound(_rhs(bound_M, lipschitz, b), m) == pytest.approx(expected)


def test_apriori_bound_index_starts_at_one():
    with pytest.raises(DomainError):
        apriori_bound(_rhs(1.0, (1.0,), 1.0), 0)


def test_certified_remainder_sums_the_remaining_bounds():
    rhs = _rhs(1.0, (1.0,), 1.0)
    tail = math.fsum(apriori_bound(rhs, j) for j in range(5, 60))
    assert tail <= certified_remainder(rhs, 4)


def test_solution_bound():
    rhs = _rhs(1.0, (1.0,), 1.0)
    assert solution_bound(rhs, 1.0, 1.0) == pytest.approx(math.e)
    assert solution_bound(_rhs(2.0, (0.0,), 1.0), 1.0, 0.5) == 2.0


@pytest.mark.parametrize(
    "changes, message",
    [
        (dict(lipschitz=(-1.0,)), "Lipschitz"),
        (dict(delta=(0.0,)), "half widths"),
        (dict(lipschitz=(1.0, 1.0)), "lipschitz needs 1 entries"),
        (dict(q=(0.5,)), "q[0]"),
    ],
    ids=["negative-lipschitz", "empty-rectangle", "wrong-length", "bad-ratio"],
)
def test_rhs_validation(changes, message):
    fields = dict(q=(1.0,), f=lambda x, y: y, lipschitz=(1.0,), bound_M=1.0, b=1.0, delta=(1.0,))
    fields.update(changes)
    with pytest.raises(ValidationError) as excinfo:
        DelayRHS(**fields)
    assert message in str(excinfo.value)
