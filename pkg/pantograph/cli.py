"""
pantograph command line: evaluate R, tabulate it against its exponential
bounds, solve with the DJM or RK4 engine, classify finite interval stability,
and run a seeded sweep of the series identities.

Exit codes: 0 ok, 1 usage, 2 domain, 3 truncation or non-convergence,
4 rectangle escape.
"""
import itertools
import logging
import math
import sys
from typing import List, Optional, Sequence, TextIO

import numpy as np

from pantograph.config import Engine, RunConfig
from pantograph.delay_spec import DelaySpec
from pantograph.djm import DelayRHS, djm_iterate
from pantograph.errors import DomainError, UsageError
from pantograph.expression import parse_expression
from pantograph.fractional import evaluate_fractional, fractional_sandwich_bounds
from pantograph.grid import GridSolution
from pantograph.integrator import integrate
from pantograph.report import Report, Table, write_table
from pantograph.router import CommandRouter, option
from pantograph.series import (
    evaluate,
    evaluate_addition,
    evaluate_derivative,
    sandwich_bounds,
)
from pantograph.stability import StabilityReport, Window, find_roots, frozen_from_spec

logger = logging.getLogger(__name__)

router = CommandRouter(description=__doc__.strip().splitlines()[0])

SPEC_OPTIONS = (
    option("--a", help="coefficients a0,...,an"),
    option("--q", help="delay ratios 1,q1,...,qn (may be omitted when n = 0)"),
)

RECTANGLE_SAMPLES = 5


@router.command(
    "eval",
    *SPEC_OPTIONS,
    option("--x", type=float),
    option("--tol", type=float),
    option("--alpha", type=float, help="Caputo order; evaluates R_alpha"),
    help="evaluate R(a;q;x) or R_alpha(a;q;x)",
)
def cmd_eval(config: RunConfig, out: TextIO) -> int:
    spec = config.delay_spec()
    config.require("x")
    if config.alpha is None:
        result = evaluate(spec, config.x, config.tol)
    else:
        result = evaluate_fractional(spec, config.alpha, config.x, config.tol)
    table = Table(columns=["x", "value", "terms_used", "tail_bound"])
    table.append(config.x, result.value, result.terms_used, result.tail_bound)
    write_table(table, out, config.as_json)
    return 0


@router.command(
    "table",
    *SPEC_OPTIONS,
    option("--x0", type=float),
    option("--x1", type=float),
    option("--steps", type=int),
    option("--tol", type=float),
    option("--alpha", type=float, help="tabulate R_alpha against Mittag-Leffler bounds"),
    help="tabulate R with its exponential (or Mittag-Leffler) sandwich bounds",
)
def cmd_table(config: RunConfig, out: TextIO) -> int:
    spec = config.delay_spec()
    config.require("x0", "x1")
    table = Table(columns=["x", "R", "lower_bound", "upper_bound"])
    for x in np.linspace(config.x0, config.x1, config.steps + 1):
        x = float(x)
        lower = upper = None
        if config.alpha is None:
            value = evaluate(spec, x, config.tol).value
            if spec.is_nonnegative and x >= 0:
                lower, upper = sandwich_bounds(spec, x)
        else:
            value = evaluate_fractional(spec, config.alpha, x, config.tol).value
            if spec.is_nonnegative:
                lower, upper = fractional_sandwich_bounds(spec, config.alpha, x, config.tol)
        table.append(x, value, lower, upper)
    write_table(table, out, config.as_json)
    return 0


def _sampled_bound(f, q: Sequence[float], b: float, y0: float, delta: float) -> float:
    """max |f| over a lattice of the rectangle; only an estimate of M"""
    xs = np.linspace(0.0, b, 2 * RECTANGLE_SAMPLES - 1)
    ys = np.linspace(y0 - delta, y0 + delta, RECTANGLE_SAMPLES)
    peak = 0.0
    for x in xs:
        for point in itertools.product(ys, repeat=len(q)):
            peak = max(peak, abs(f(float(x), *point)))
    if not math.isfinite(peak):
        raise DomainError("--rhs is not finite on the rectangle; pass --bound")
    return peak or 1.0


def _djm_rhs(config: RunConfig) -> DelayRHS:
    if config.rhs is None:
        return DelayRHS.linear(config.delay_spec(), config.b, config.y0)
    q = config.ratios
    f = parse_expression(config.rhs, n_delays=len(q) - 1)
    config.require("lipschitz")
    bound = config.bound
    if bound is None:
        bound = _sampled_bound(f, q, config.b, config.y0, config.delta)
        logger.warning("bound M=%r estimated by sampling; pass --bound for a certified error", bound)
    return DelayRHS(
        q=q,
        f=f,
        lipschitz=config.lipschitz,
        bound_M=bound,
        b=config.b,
        delta=(config.delta,) * len(q),
    )


def _djm(config: RunConfig) -> GridSolution:
    solution = djm_iterate(
        _djm_rhs(config), y0=config.y0, N=config.N, max_iter=config.max_iter, tol=config.djm_tol
    )
    logger.info(
        "DJM converged after %d increments, certified error %r",
        solution.iteration_count, solution.certified_error,
    )
    return solution


def _rk4(config: RunConfig) -> np.ndarray:
    if config.rhs is not None:
        raise UsageError("the rk4 engine solves the linear equation only; drop --rhs or use --engine djm")
    solution = integrate(config.delay_spec(), config.b, config.b / config.N)
    # linear in y0
    return config.y0 * np.asarray(solution.values)


@router.command(
    "solve",
    *SPEC_OPTIONS,
    option("--b", type=float, help="interval end"),
    option("--N", type=int, help="grid intervals (>= 16)"),
    option("--engine", choices=[e.value for e in Engine]),
    option("--compare", action="store_true", help="run both engines side by side"),
    option("--rhs", help="f(x, y0, ..., yn), e.g. 'y0 - y1^2'"),
    option("--lipschitz", help="Lipschitz constants L0,...,Ln of --rhs"),
    option("--bound", type=float, help="bound M of |f| on the rectangle"),
    option("--delta", type=float, help="rectangle half width around y0"),
    option("--y0", type=float),
    option("--max-iter", type=int),
    option("--djm-tol", type=float),
    help="solve the delay equation on a uniform grid",
)
def cmd_solve(config: RunConfig, out: TextIO) -> int:
    if config.compare:
        if config.rhs is not None:
            raise UsageError("--compare needs the linear equation (both engines); drop --rhs")
        djm = _djm(config)
        rk4 = _rk4(config)
        table = Table(columns=["x", "y_djm", "y_rk4", "abs_diff"])
        for x, y_djm, y_rk4 in zip(djm.nodes, djm.values, rk4):
            table.append(float(x), float(y_djm), float(y_rk4), float(abs(y_djm - y_rk4)))
    else:
        if config.engine is Engine.rk4:
            nodes = np.linspace(0.0, config.b, config.N + 1)
            values = _rk4(config)
        else:
            solution = _djm(config)
            nodes, values = solution.nodes, solution.values
        table = Table(columns=["x", "y"])
        for x, y in zip(nodes, values):
            table.append(float(x), float(y))
    write_table(table, out, config.as_json)
    return 0


@router.command(
    "stability",
    *SPEC_OPTIONS,
    option("--x0", type=float, help="freeze point"),
    option("--re-min", type=float),
    option("--re-max", type=float),
    option("--im-max", type=float),
    option("--grid", type=int, help="Newton start lattice size (>= 8)"),
    help="finite interval stability of the equation frozen at x0",
)
def cmd_stability(config: RunConfig, out: TextIO) -> int:
    spec = config.delay_spec()
    config.require("x0")
    frozen = frozen_from_spec(spec, config.x0)
    window = config.window(Window.default_for(frozen))
    report = find_roots(frozen, window, config.grid)
    if config.as_json:
        out.write(Report[StabilityReport](result=report).json() + "\n")
        return 0
    table = Table(
        columns=["x0", "re", "im", "max_real_part", "verdict", "zero_count", "certified"]
    )
    common = dict(
        max_real_part=report.max_real_part,
        verdict=report.verdict.value,
        zero_count=report.zero_count,
        certified=str(report.certified).lower(),
    )
    for root in report.roots or [None]:
        re, im = (root.re, root.im) if root is not None else (None, None)
        table.append(report.x0, re, im, *common.values())
    write_table(table, out, as_json=False)
    return 0


def _random_spec(rng: np.random.Generator, nonnegative: bool = False) -> DelaySpec:
    n = int(rng.integers(0, 4))
    a = rng.uniform(0.0 if nonnegative else -1.0, 1.0, n + 1)
    q = np.concatenate([[1.0], rng.uniform(0.05, 0.95, n)])
    return DelaySpec.of(a.tolist(), q.tolist())


def _check_properties(rng: np.random.Generator) -> List[tuple]:
    """(property, violated) pairs for one random draw"""
    results = []

    a0, x = float(rng.uniform(-1.0, 1.0)), float(rng.uniform(-2.0, 2.0))
    exact = math.exp(a0 * x)
    value = evaluate(DelaySpec.of([a0]), x, 1e-15).value
    results.append(("exp_degeneration", abs(value - exact) > 1e-13 * exact))

    spec = _random_spec(rng)
    x = float(rng.uniform(0.0, 2.0))
    scale = math.exp(spec.abs_sum * x)
    derivative = evaluate_derivative(spec, x, 1).value
    delayed = math.fsum(ai * evaluate(spec, qi * x).value for ai, qi in zip(spec.a, spec.q))
    results.append(("ode_residual", abs(derivative - delayed) > 1e-10 * scale))

    y = float(rng.uniform(-1.0, 1.0))
    split = evaluate_addition(spec, x, y, 40)
    direct = evaluate(spec, x + y)
    slack = split.tail_bound + direct.tail_bound + 1e-12 * scale * math.exp(spec.abs_sum)
    results.append(("addition_theorem", abs(split.value - direct.value) > slack))

    spec = _random_spec(rng, nonnegative=True)
    value = evaluate(spec, x).value
    lower, upper = sandwich_bounds(spec, x)
    slack = 1e-12 * upper
    results.append(("sandwich", not lower - slack <= value <= upper + slack))
    return results


@router.command(
    "check",
    option("--seed", type=int),
    option("--samples", type=int),
    help="seeded sweep of the series identities; exit 2 on any violation",
)
def cmd_check(config: RunConfig, out: TextIO) -> int:
    rng = np.random.default_rng(config.seed)
    checked, violations = {}, {}
    for _ in range(config.samples):
        for name, violated in _check_properties(rng):
            checked[name] = checked.get(name, 0) + 1
            violations[name] = violations.get(name, 0) + int(violated)
    table = Table(columns=["property", "checked", "violations"])
    for name in checked:
        table.append(name, checked[name], violations[name])
    write_table(table, out, config.as_json)
    if any(violations.values()):
        logger.warning("identity violations with seed %d: %r", config.seed, violations)
        return 2
    return 0


def main(
    argv: Optional[Sequence[str]] = None,
    stdout: Optional[TextIO] = None,
    stderr: Optional[TextIO] = None,
) -> int:
    return router.dispatch(
        sys.argv[1:] if argv is None else argv,
        stdout or sys.stdout,
        stderr or sys.stderr,
    )
