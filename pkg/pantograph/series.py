"""
The entire function R(a;q;x) = sum_m x^m / m! * (a;q)_m solving

    y'(x) = sum_i a_i y(q_i x),  y(0) = 1

where (a;q)_m = prod_{j<m} sum_i a_i q_i^j and (a;q)_0 = 1.

Every evaluation stops on a rigorous truncation bound rather than on a small term:
since |sum_i a_i q_i^j| <= A = sum_i |a_i|, the discarded tail is dominated by the
remainder of exp(A|x|).
"""
import cmath
import logging
import math
from typing import Optional, Tuple, Union

import numpy as np
from pydantic import Field, validator

from pantograph.base_model import FrozenModel
from pantograph.delay_spec import DelaySpec
from pantograph.errors import DomainError, SeriesRangeError, TruncationError
from pantograph.summation import CompensatedSum

logger = logging.getLogger(__name__)

# tol=None sums until the tail is below half an ulp of the partial sum
DEFAULT_TOL = 1e-14
DEFAULT_MAX_TERMS = 10_000

# largest argument math.exp accepts without OverflowError
_EXP_LIMIT = 709.0


class SeriesValue(FrozenModel):
    value: float
    terms_used: int = Field(..., ge=1, description="number of series terms summed")
    tail_bound: float = Field(..., ge=0, description="bound on |sum of the discarded terms|")

    @validator("tail_bound")
    def _finite_tail(cls, tail_bound):
        if not math.isfinite(tail_bound):
            raise ValueError("tail_bound must be finite")
        return tail_bound


class ComplexValue(FrozenModel):
    re: float
    im: float

    @validator("re", "im")
    def _finite(cls, value, field):
        if not math.isfinite(value):
            raise ValueError(f"{field.name} must be finite, got {value!r}")
        return value

    @classmethod
    def from_complex(cls, z: complex) -> "ComplexValue":
        return cls(re=z.real, im=z.imag)

    def __complex__(self):
        return complex(self.re, self.im)

    def __abs__(self):
        return abs(complex(self))


class CoefficientStream:
    """
    Produces (a;q)_m for m = 0, 1, 2, ... by the forward recurrence
    c_{m+1} = c_m * sum_i a_i q_i^m, so each step costs O(n).

    Single owner: the stream mutates as it advances and must not be shared.
    """

    def __init__(self, spec: DelaySpec, ratios: Optional[np.ndarray] = None):
        self.spec = spec
        self.index = 0
        self.product = 1.0
        self._a = spec.coefficients
        self._q = spec.ratios if ratios is None else ratios
        self._powers = np.ones_like(self._a)
        # a factor was exactly zero, so every later product is zero too
        self.vanished = False

    def factor(self) -> float:
        """sum_i a_i q_i^m at the current index m"""
        return float(np.dot(self._a, self._powers))

    def advance(self) -> float:
        factor = self.factor()
        if factor == 0.0:
            self.vanished = True
        self.product *= factor
        self._powers = self._powers * self._q
        self.index += 1
        if not math.isfinite(self.product):
            raise SeriesRangeError("coefficient product overflowed", self.index)
        return self.product

    def __iter__(self):
        while True:
            yield self.index, self.product
            self.advance()


def coefficient_product(spec: DelaySpec, m: int) -> float:
    """(a;q)_m = prod_{j=0}^{m-1} sum_i a_i q_i^j, equal to 1 for m = 0"""
    if m < 0:
        raise DomainError(f"coefficient index must be non-negative, got {m}")
    stream = CoefficientStream(spec)
    while stream.index < m:
        stream.advance()
    return stream.product


def safe_exp(value: float) -> float:
    return math.inf if value > _EXP_LIMIT else math.exp(value)


def safe_expm1(value: float) -> float:
    return math.inf if value > _EXP_LIMIT else math.expm1(value)


def exponential_tail(s: float, m: int) -> float:
    """
    Bound on sum_{k>m} s^k / k! for s >= 0.

    Once m + 2 > s the remainder is dominated by the geometric series started at
    its first term; before that only the whole exponential e^s is a usable bound.
    Bounds beyond the float range are returned as inf.
    """
    if s == 0.0:
        return 0.0
    if m + 2 <= s:
        return safe_exp(s)
    first = safe_exp((m + 1) * math.log(s) - math.lgamma(m + 2))
    return first / (1.0 - s / (m + 2))


def stopping_threshold(tol: Optional[float], partial: Union[float, complex]) -> float:
    """tol, or half an ulp of the partial sum when tol is None"""
    if tol is None:
        return 0.5 * math.ulp(abs(partial))
    return tol


def crossover_index(spec: DelaySpec, x: float) -> int:
    """
    Index past which the terms of R(a;q;x) shrink strictly in magnitude:
    |term_{m+1} / term_m| <= A|x| / (m + 1) < 1 for every m >= floor(A|x|).
    """
    return int(math.floor(spec.abs_sum * abs(x)))


def _check_tol(tol: Optional[float]):
    if tol is not None and not tol > 0:
        raise DomainError(f"tol must be positive, got {tol!r}")


def _sum_derivative_series(
    spec: DelaySpec, x: Union[float, complex], r: int, tol: Optional[float], max_terms: int
) -> Tuple[Union[float, complex], int, float]:
    """sum_{k>=0} x^k / k! * (a;q)_{k+r} with its truncation bound"""
    _check_tol(tol)
    if not cmath.isfinite(x):
        raise DomainError(f"argument must be finite, got {x!r}")
    if r < 0:
        raise DomainError(f"derivative order must be non-negative, got {r}")

    stream = CoefficientStream(spec)
    for _ in range(r):
        stream.advance()

    abs_sum = spec.abs_sum
    majorant = abs_sum * abs(x)
    # |(a;q)_{k+r}| <= A^r * A^k
    weight = abs_sum**r

    real_part, imag_part = CompensatedSum(), CompensatedSum()
    is_complex = isinstance(x, complex)
    scale = x ** 0  # x^k / k!, of the same kind as x
    tail = math.inf
    for k in range(max_terms):
        term = scale * stream.product
        if not cmath.isfinite(term):
            raise SeriesRangeError("series term is not finite", k + r)
        real_part += term.real
        if is_complex:
            imag_part += term.imag
        partial = complex(real_part.value, imag_part.value) if is_complex else real_part.value
        tail = 0.0 if stream.vanished else weight * exponential_tail(majorant, k)
        if tail <= stopping_threshold(tol, partial):
            logger.debug(
                "R^(%d) at x=%r: %d terms, tail bound %.3e, rounding bound %.3e",
                r, x, k + 1, tail, real_part.rounding_bound + imag_part.rounding_bound,
            )
            return partial, k + 1, tail
        stream.advance()
        scale = scale * x / (k + 1)
    raise TruncationError(f"tolerance {tol!r} not reached within {max_terms} terms", tail)


def evaluate_derivative(
    spec: DelaySpec,
    x: float,
    r: int,
    tol: Optional[float] = None,
    *,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> SeriesValue:
    """
    r-th derivative R^(r)(a;q;x) = sum_{m>=r} x^(m-r) / (m-r)! * (a;q)_m.

    r = 0 runs the same summation as ``evaluate`` and agrees with it bit for bit.
    """
    value, terms, tail = _sum_derivative_series(spec, float(x), r, tol, max_terms)
    return SeriesValue(value=value, terms_used=terms, tail_bound=tail)


def evaluate(
    spec: DelaySpec,
    x: float,
    tol: Optional[float] = None,
    *,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> SeriesValue:
    """
    R(a;q;x), summed in ascending order with compensation until the exponential
    majorant guarantees |discarded tail| <= tol. The default tol=None keeps going
    until the tail is below half an ulp of the sum, i.e. to double precision.
    A coefficient product that is exactly zero ends the series with a zero tail.

    Negative x is allowed: the series has infinite radius of convergence.

    :raises TruncationError: tol is not reached within ``max_terms`` terms
    :raises SeriesRangeError: an intermediate term overflowed
    """
    return evaluate_derivative(spec, x, 0, tol, max_terms=max_terms)


def evaluate_with_initial_value(
    spec: DelaySpec,
    x: float,
    y0: float,
    tol: Optional[float] = None,
    *,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> SeriesValue:
    """solution with y(0) = y0, which by linearity is y0 * R(a;q;x)"""
    if y0 == 0:
        return SeriesValue(value=0.0, terms_used=1, tail_bound=0.0)
    scaled_tol = None if tol is None else tol / abs(y0)
    base = evaluate(spec, x, scaled_tol, max_terms=max_terms)
    return SeriesValue(
        value=y0 * base.value,
        terms_used=base.terms_used,
        tail_bound=abs(y0) * base.tail_bound,
    )


def evaluate_addition(
    spec: DelaySpec,
    x: float,
    y: float,
    R: int,
    tol: Optional[float] = None,
    *,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> SeriesValue:
    """
    Addition theorem R(x + y) = sum_r x^r / r! * R^(r)(y), truncated after r = R.

    The tail bound combines the inner truncation of every derivative with the
    outer remainder, using |R^(r)(y)| <= A^r e^(A|y|).
    """
    if R < 0:
        raise DomainError(f"number of outer terms must be non-negative, got {R}")
    acc = CompensatedSum()
    inner_tail = 0.0
    weight = 1.0
    for r in range(R + 1):
        inner = evaluate_derivative(spec, y, r, tol, max_terms=max_terms)
        acc += weight * inner.value
        inner_tail += abs(weight) * inner.tail_bound
        weight *= x / (r + 1)

    abs_sum = spec.abs_sum
    outer_tail = exponential_tail(abs_sum * abs(x), R)
    if outer_tail > 0:
        outer_tail *= safe_exp(abs_sum * abs(y))
    if not math.isfinite(outer_tail):
        raise TruncationError(f"outer remainder after {R + 1} terms exceeds the float range", outer_tail)
    return SeriesValue(value=acc.value, terms_used=R + 1, tail_bound=inner_tail + outer_tail)


def evaluate_complex(
    spec: DelaySpec,
    z: Union[ComplexValue, complex],
    tol: Optional[float] = None,
    *,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> ComplexValue:
    """
    R(a;q;z) summed in complex arithmetic. ``re`` and ``im`` are the real and
    imaginary parts, i.e. the cosine-like and sine-like companions of R.
    """
    value, terms, tail = _sum_derivative_series(spec, complex(z), 0, tol, max_terms)
    logger.debug("R at z=%r used %d terms (tail bound %.3e)", complex(z), terms, tail)
    return ComplexValue.from_complex(value)


def sandwich_bounds(spec: DelaySpec, x: float) -> Tuple[float, float]:
    """
    (e^(a_0 x), e^((sum_i a_i) x)), which enclose R(a;q;x) for non-negative
    coefficients and x >= 0.
    """
    for i, ai in enumerate(spec.a):
        if ai < 0:
            raise DomainError(f"sandwich bounds need a[{i}] >= 0, got {ai!r}")
    if x < 0:
        raise DomainError(f"sandwich bounds need x >= 0, got {x!r}")
    return safe_exp(spec.a[0] * x), safe_exp(spec.total * x)
