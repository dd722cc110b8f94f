"""
Daftardar-Gejji-Jafari (DJM) successive approximation on a grid for

    y'(x) = f(x, y(q_0 x), ..., y(q_n x)),  y(0) = y0,  q_0 = 1 > q_1, ..., q_n > 0.

Written as y = y0 + integral_0^x f(t, y(q_0 t), ...) dt, the DJM terms are
y_1 = integral f(S_0) and y_{m+1} = integral [f(S_m) - f(S_{m-1})], where S_m is
the partial sum y_0 + ... + y_m. When f is Lipschitz with constants L_i and
|f| <= M on the rectangle 0 <= x <= b, |y_i - y0| <= delta_i, every increment
obeys |y_m| <= M (sum L_i)^(m-1) b^m / m!.
"""
import logging
import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from pydantic import Field, root_validator, validator
from scipy.integrate import cumulative_trapezoid

from pantograph.base_model import FrozenModel
from pantograph.delay_spec import DelaySpec, check_delay_ratios
from pantograph.errors import ConvergenceError, DomainError, RectangleEscapeError
from pantograph.grid import GridSolution, monotone_interpolant, uniform_nodes
from pantograph.series import coefficient_product, exponential_tail, safe_exp, safe_expm1

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 100
DEFAULT_DJM_TOL = 1e-10


class DelayRHS(FrozenModel):
    """
    Right hand side f(x, y_0, ..., y_n) together with the hypotheses of the
    convergence theorem: Lipschitz constants, the bound M and the rectangle.
    Lipschitz constants are supplied by the caller, never estimated.

    f must be a pure function: parallel solves may call it concurrently.
    """

    q: Tuple[float, ...]
    f: Callable[..., float]
    lipschitz: Tuple[float, ...]
    bound_M: float = Field(..., gt=0)
    b: float = Field(..., gt=0)
    delta: Tuple[float, ...]

    _delay_ratios = validator("q", allow_reuse=True)(check_delay_ratios)

    @validator("lipschitz", each_item=True)
    def _non_negative(cls, value):
        if not (math.isfinite(value) and value >= 0):
            raise ValueError(f"Lipschitz constants must be finite and >= 0, got {value!r}")
        return value

    @validator("delta", each_item=True)
    def _positive(cls, value):
        if not (math.isfinite(value) and value > 0):
            raise ValueError(f"rectangle half widths must be finite and > 0, got {value!r}")
        return value

    @root_validator(skip_on_failure=True)
    def _one_entry_per_delay(cls, values):
        expected = len(values["q"])
        for name in ("lipschitz", "delta"):
            if len(values[name]) != expected:
                raise ValueError(f"{name} needs {expected} entries, got {len(values[name])}")
        return values

    @property
    def n_delays(self) -> int:
        return len(self.q) - 1

    @property
    def lipschitz_sum(self) -> float:
        return math.fsum(self.lipschitz)

    @classmethod
    def linear(cls, spec: DelaySpec, b: float, y0: float = 1.0) -> "DelayRHS":
        """
        f = sum_i a_i y_i. Every partial sum satisfies |S_m(x)| <= |y0| e^(A x), so
        delta_i = max(|y0|, 1) e^(A b) keeps the iteration inside the rectangle,
        and M = A (|y0| + delta) bounds |f| there.
        """
        a = tuple(spec.a)

        def f(x, *ys):
            return math.fsum(ai * yi for ai, yi in zip(a, ys))

        abs_sum = spec.abs_sum
        delta = max(abs(y0), 1.0) * safe_exp(abs_sum * b)
        # any positive M bounds f = 0
        bound_M = abs_sum * (abs(y0) + delta) or 1.0
        return cls(
            q=spec.q,
            f=f,
            lipschitz=tuple(abs(ai) for ai in a),
            bound_M=bound_M,
            b=b,
            delta=(delta,) * len(a),
        )


def apriori_bound(rhs: DelayRHS, m: int) -> float:
    """M (sum L_i)^(m-1) b^m / m!, the bound on the m-th DJM increment"""
    if m < 1:
        raise DomainError(f"increment index must be >= 1, got {m}")
    lipschitz_sum = rhs.lipschitz_sum
    if lipschitz_sum == 0:
        return rhs.bound_M * rhs.b if m == 1 else 0.0
    log_bound = (
        math.log(rhs.bound_M)
        + (m - 1) * math.log(lipschitz_sum)
        + m * math.log(rhs.b)
        - math.lgamma(m + 1)
    )
    return safe_exp(log_bound)


def certified_remainder(rhs: DelayRHS, m: int) -> float:
    """
    Bound on sum_{j>m} |y_j|: M / L * (e^(L b) - sum_{j<=m} (L b)^j / j!), L = sum L_i,
    taken from the exponential remainder rather than by subtraction.
    """
    lipschitz_sum = rhs.lipschitz_sum
    if lipschitz_sum == 0:
        return rhs.bound_M * rhs.b if m < 1 else 0.0
    return rhs.bound_M / lipschitz_sum * exponential_tail(lipschitz_sum * rhs.b, m)


def solution_bound(rhs: DelayRHS, y0: float, x: float) -> float:
    """|y(x)| <= M / L (e^(L x) - 1) + |y0| on [0, b]"""
    lipschitz_sum = rhs.lipschitz_sum
    if lipschitz_sum == 0:
        return rhs.bound_M * x + abs(y0)
    return rhs.bound_M / lipschitz_sum * safe_expm1(lipschitz_sum * x) + abs(y0)


def djm_symbolic_linear_terms(spec: DelaySpec, m: int) -> float:
    """
    For the linear equation the m-th DJM term is exactly (a;q)_m x^m / m!;
    returns the coefficient (a;q)_m.
    """
    return coefficient_product(spec, m)


def _delayed_arguments(
    rhs: DelayRHS, partial_sum: np.ndarray, nodes: np.ndarray
) -> Sequence[np.ndarray]:
    """S(q_i x_k) for every i; q_0 = 1 reads the nodes, the rest interpolate"""
    interpolant = monotone_interpolant(rhs.b, partial_sum)
    # q_i <= 1, so q_i x_k never leaves [0, x_k]: no extrapolation
    return [partial_sum] + [interpolant(qi * nodes) for qi in rhs.q[1:]]


def _check_rectangle(rhs: DelayRHS, delayed: Sequence[np.ndarray], y0: float, iteration: int):
    for i, (values, delta) in enumerate(zip(delayed, rhs.delta)):
        peak = float(np.max(np.abs(values)))
        if not peak <= delta + abs(y0):
            raise RectangleEscapeError(
                f"iterate {iteration} left the rectangle in argument y{i}: "
                f"|S(q_{i} x)| reached {peak!r} > delta[{i}] + |y0| = {delta + abs(y0)!r}"
            )


def _apply(f: Callable[..., float], nodes: np.ndarray, delayed: Sequence[np.ndarray]) -> np.ndarray:
    return np.fromiter(
        (f(x, *ys) for x, *ys in zip(nodes, *delayed)), dtype=float, count=len(nodes)
    )


def djm_iterate(
    rhs: DelayRHS,
    y0: float = 1.0,
    N: int = 512,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_DJM_TOL,
    *,
    initial_iterate: Optional[np.ndarray] = None,
) -> GridSolution:
    """
    Runs the DJM iteration on the grid x_k = k b / N until the sup norm of the
    last increment is <= tol.

    Integrals use the composite trapezoid rule on the same grid; the delayed
    values S_m(q_i t) come from a monotone cubic interpolant of S_m. Passing
    ``initial_iterate`` replaces S_0 = y0 by another grid function with the same
    initial value; the first increment is then y0 + integral f(S_0) - S_0.

    :raises RectangleEscapeError: an iterate fed to f leaves the theorem's rectangle
    :raises ConvergenceError: tol is not reached within ``max_iter`` increments
    """
    if N < 16:
        raise DomainError(f"grid size N must be at least 16, got {N}")
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    nodes = uniform_nodes(rhs.b, N)

    if initial_iterate is None:
        partial_sum = np.full(N + 1, float(y0))
    else:
        partial_sum = np.array(initial_iterate, dtype=float)
        if partial_sum.shape != nodes.shape:
            raise DomainError(f"initial iterate needs {N + 1} node values, got {partial_sum.shape}")
        if partial_sum[0] != y0:
            raise DomainError(f"initial iterate must start at y0={y0!r}, got {partial_sum[0]!r}")

    previous_f = None
    norms = []
    norm = math.inf
    for m in range(max_iter):
        delayed = _delayed_arguments(rhs, partial_sum, nodes)
        _check_rectangle(rhs, delayed, y0, m)
        current_f = _apply(rhs.f, nodes, delayed)
        if previous_f is not None:
            # G_m = f(S_m) - f(S_{m-1})
            increment = cumulative_trapezoid(current_f - previous_f, nodes, initial=0.0)
        elif initial_iterate is None:
            increment = cumulative_trapezoid(current_f, nodes, initial=0.0)
        else:
            increment = y0 + cumulative_trapezoid(current_f, nodes, initial=0.0) - partial_sum
        partial_sum = partial_sum + increment
        previous_f = current_f

        norm = float(np.max(np.abs(increment)))
        norms.append(norm)
        logger.debug("DJM increment %d: sup norm %.3e", m + 1, norm)
        if not math.isfinite(norm):
            raise RectangleEscapeError(f"increment {m + 1} is not finite")
        if norm <= tol:
            return GridSolution(
                b=rhs.b,
                N=N,
                values=partial_sum,
                iteration_count=m + 1,
                certified_error=certified_remainder(rhs, m + 1),
                increment_norms=tuple(norms),
            )
    raise ConvergenceError(f"DJM did not reach tol={tol!r} in {max_iter} increments", norm)
