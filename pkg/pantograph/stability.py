"""
Finite interval stability of y'(x) = sum_i a_i y(q_i x) frozen at x0.

With the delays tau_i = (1 - q_i) x0 held fixed the equation becomes a constant
delay equation with characteristic function

    h(lambda) = lambda - sum_i a_i exp(-lambda tau_i).

If every root of h has a negative real part the equilibrium is stable on some
finite interval [x0, x_bar); x_bar itself is not estimated.

Roots are searched in a bounded rectangle. Any root with Re lambda >= 0 obeys
|lambda| = |sum_i a_i exp(-lambda tau_i)| <= sum_i |a_i|, so a rectangle reaching
past that bound to the right and in both imaginary directions, and left of the
imaginary axis, holds every root that can make the equation unstable. The
argument principle counts the zeros inside the rectangle so that a missed root
turns the verdict into "inconclusive" instead of a wrong "stable".
"""
import logging
import math
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import Field, root_validator, validator

from pantograph.base_model import FrozenModel
from pantograph.delay_spec import DelaySpec
from pantograph.errors import DomainError
from pantograph.series import ComplexValue

logger = logging.getLogger(__name__)

DEFAULT_GRID = 24
NEWTON_ITERATIONS = 60
DEDUP_TOL = 1e-8
ROOT_RESIDUAL = 1e-9
BOUNDARY_SAMPLES = 64
MAX_PHASE_STEP = math.pi / 4
MAX_BISECTIONS = 20
REFINE_DEPTH = 6


class Verdict(str, Enum):
    stable = "stable-on-finite-interval"
    unstable = "unstable"
    inconclusive = "inconclusive"


class FrozenDelays(FrozenModel):
    tau: Tuple[float, ...]
    a: Tuple[float, ...]
    x0: float = 0.0

    @validator("tau", "a", each_item=True)
    def _finite(cls, value, field):
        if not math.isfinite(value):
            raise ValueError(f"{field.name} entries must be finite, got {value!r}")
        return value

    @validator("tau")
    def _delays(cls, tau):
        if not tau or tau[0] != 0.0:
            raise ValueError("tau[0] must be exactly 0 (the undelayed term)")
        for i, ti in enumerate(tau):
            if ti < 0:
                raise ValueError(f"tau[{i}]={ti!r} must be non-negative")
        return tau

    @root_validator(skip_on_failure=True)
    def _equal_lengths(cls, values):
        if len(values["tau"]) != len(values["a"]):
            raise ValueError(f"tau has {len(values['tau'])} entries but a has {len(values['a'])}")
        return values

    @property
    def abs_sum(self) -> float:
        return math.fsum(abs(ai) for ai in self.a)


class Window(FrozenModel):
    """the rectangle re_min <= Re lambda <= re_max, |Im lambda| <= im_max"""

    re_min: float
    re_max: float
    im_max: float = Field(..., gt=0)

    @validator("re_min", "re_max", "im_max")
    def _finite(cls, value, field):
        if not math.isfinite(value):
            raise ValueError(f"{field.name} must be finite, got {value!r}")
        return value

    @root_validator(skip_on_failure=True)
    def _ordered(cls, values):
        if not values["re_min"] < values["re_max"]:
            raise ValueError("re_min must be smaller than re_max")
        return values

    @classmethod
    def default_for(cls, fd: FrozenDelays) -> "Window":
        reach = fd.abs_sum + 1.0
        return cls(re_min=-5.0, re_max=reach, im_max=max(40.0, reach))

    def contains(self, z: complex) -> bool:
        return self.re_min < z.real < self.re_max and abs(z.imag) < self.im_max

    def certifies(self, abs_sum: float) -> bool:
        """whether every root with Re lambda >= 0 is guaranteed to lie inside"""
        return self.re_min < 0 and self.re_max > abs_sum and self.im_max > abs_sum

    def corners(self) -> List[complex]:
        s = self.im_max
        return [
            complex(self.re_min, -s),
            complex(self.re_max, -s),
            complex(self.re_max, s),
            complex(self.re_min, s),
        ]

    def quadrants(self) -> List["_Cell"]:
        """four sub-rectangles (the imaginary range is split asymmetrically as well)"""
        mid = (self.re_min + self.re_max) / 2
        return [
            _Cell(self.re_min, mid, -self.im_max, 0.0),
            _Cell(mid, self.re_max, -self.im_max, 0.0),
            _Cell(self.re_min, mid, 0.0, self.im_max),
            _Cell(mid, self.re_max, 0.0, self.im_max),
        ]


class _Cell:
    """general rectangle used while subdividing a window"""

    def __init__(self, re_min: float, re_max: float, im_min: float, im_max: float):
        self.re_min, self.re_max = re_min, re_max
        self.im_min, self.im_max = im_min, im_max

    def contains(self, z: complex) -> bool:
        return self.re_min < z.real < self.re_max and self.im_min < z.imag < self.im_max

    def corners(self) -> List[complex]:
        return [
            complex(self.re_min, self.im_min),
            complex(self.re_max, self.im_min),
            complex(self.re_max, self.im_max),
            complex(self.re_min, self.im_max),
        ]

    def quadrants(self) -> List["_Cell"]:
        re_mid = (self.re_min + self.re_max) / 2
        im_mid = (self.im_min + self.im_max) / 2
        return [
            _Cell(self.re_min, re_mid, self.im_min, im_mid),
            _Cell(re_mid, self.re_max, self.im_min, im_mid),
            _Cell(self.re_min, re_mid, im_mid, self.im_max),
            _Cell(re_mid, self.re_max, im_mid, self.im_max),
        ]

    def lattice(self, points: int) -> np.ndarray:
        re = np.linspace(self.re_min, self.re_max, points + 2)[1:-1]
        im = np.linspace(self.im_min, self.im_max, points + 2)[1:-1]
        return (re[None, :] + 1j * im[:, None]).ravel()


class StabilityReport(FrozenModel):
    roots: Tuple[ComplexValue, ...]
    max_real_part: Optional[float]
    verdict: Verdict
    window: Window
    x0: float
    zero_count: Optional[int] = Field(None, description="zeros inside the window by the argument principle")
    certified: bool = Field(..., description="window holds every root with Re >= 0")


def _h(fd: FrozenDelays, lam: np.ndarray) -> np.ndarray:
    value = np.array(lam, dtype=complex)
    for ai, ti in zip(fd.a, fd.tau):
        value = value - ai * np.exp(-lam * ti)
    return value


def _dh(fd: FrozenDelays, lam: np.ndarray) -> np.ndarray:
    value = np.ones_like(lam, dtype=complex)
    for ai, ti in zip(fd.a, fd.tau):
        value = value + ai * ti * np.exp(-lam * ti)
    return value


def char_fn(fd: FrozenDelays, lam: complex) -> complex:
    """h(lambda) = lambda - sum_i a_i exp(-lambda tau_i)"""
    return complex(_h(fd, np.asarray(lam, dtype=complex)))


def char_fn_derivative(fd: FrozenDelays, lam: complex) -> complex:
    """h'(lambda) = 1 + sum_i a_i tau_i exp(-lambda tau_i)"""
    return complex(_dh(fd, np.asarray(lam, dtype=complex)))


def frozen_from_spec(spec: DelaySpec, x0: float) -> FrozenDelays:
    """tau_i = (1 - q_i) x0; tau_0 = 0 because q_0 = 1"""
    if not (math.isfinite(x0) and x0 >= 0):
        raise DomainError(f"freeze point x0 must be >= 0, got {x0!r}")
    return FrozenDelays(tau=spec.delays_at(x0), a=spec.a, x0=x0)


def _newton(fd: FrozenDelays, starts: np.ndarray) -> np.ndarray:
    lam = np.array(starts, dtype=complex)
    with np.errstate(all="ignore"):
        for _ in range(NEWTON_ITERATIONS):
            lam = lam - _h(fd, lam) / _dh(fd, lam)
    return lam[np.isfinite(lam)]


def _accept(fd: FrozenDelays, candidates: np.ndarray, region) -> List[complex]:
    """roots with a small residual inside region, real roots snapped to the axis"""
    accepted = []
    with np.errstate(all="ignore"):
        residuals = np.abs(_h(fd, candidates))
    for z, residual in zip(candidates, residuals):
        z = complex(z)
        if not residual <= ROOT_RESIDUAL * (1 + abs(z)):
            continue
        if abs(z.imag) <= DEDUP_TOL:
            z = complex(z.real, 0.0)
        if region.contains(z):
            accepted.append(z)
    return accepted


def _deduplicate(roots: Sequence[complex]) -> List[complex]:
    unique: List[complex] = []
    for z in sorted(roots, key=lambda z: (z.real, z.imag)):
        if all(abs(z - u) > DEDUP_TOL for u in unique):
            unique.append(z)
    return unique


def _conjugate_closed(roots: Sequence[complex]) -> List[complex]:
    """real coefficients: keep the upper half plane and mirror it"""
    upper = [z for z in roots if z.imag >= 0]
    lower = [z.conjugate() for z in upper if z.imag > 0]
    return _deduplicate(upper + lower)


class _Unresolved(Exception):
    pass


def _segment_phase(fd, z0: complex, z1: complex, h0: complex, h1: complex, depth: int) -> float:
    step = math.atan2((h1 / h0).imag, (h1 / h0).real)
    if abs(step) <= MAX_PHASE_STEP:
        return step
    if depth == 0:
        raise _Unresolved
    zm = (z0 + z1) / 2
    hm = char_fn(fd, zm)
    if hm == 0 or not math.isfinite(abs(hm)):
        raise _Unresolved
    return _segment_phase(fd, z0, zm, h0, hm, depth - 1) + _segment_phase(
        fd, zm, z1, hm, h1, depth - 1
    )


def winding_count(fd: FrozenDelays, region) -> Optional[int]:
    """
    Number of zeros of h inside a rectangle by the argument principle: the change
    of arg h along the boundary, sampled until consecutive samples differ by at
    most pi/4, divided by 2 pi. None when the count cannot be resolved (a zero on
    or extremely close to the boundary).
    """
    corners = region.corners()
    total = 0.0
    try:
        for z_start, z_end in zip(corners, corners[1:] + corners[:1]):
            points = z_start + (z_end - z_start) * np.linspace(0.0, 1.0, BOUNDARY_SAMPLES + 1)
            with np.errstate(all="ignore"):
                values = _h(fd, points)
            if not np.all(np.isfinite(values)) or np.any(values == 0):
                raise _Unresolved
            for k in range(BOUNDARY_SAMPLES):
                total += _segment_phase(
                    fd, points[k], points[k + 1], values[k], values[k + 1], MAX_BISECTIONS
                )
    except _Unresolved:
        return None
    turns = total / (2 * math.pi)
    count = round(turns)
    if abs(turns - count) > 0.25:
        return None
    return int(count)


def _refine(fd: FrozenDelays, cell, known: List[complex], depth: int) -> List[complex]:
    """subdivide cells whose zero count exceeds the roots already found there"""
    count = winding_count(fd, cell)
    inside = [z for z in known if cell.contains(z)]
    if count is not None and count <= len(inside):
        return []
    if depth == 0 or count is None or count == 1:
        found = _accept(fd, _newton(fd, cell.lattice(6)), cell)
        new = [z for z in found if all(abs(z - k) > DEDUP_TOL for k in known)]
        if new or depth == 0:
            return new
    found: List[complex] = []
    for quadrant in cell.quadrants():
        found.extend(_refine(fd, quadrant, known + found, depth - 1))
    return found


def find_roots(
    fd: FrozenDelays,
    window: Optional[Window] = None,
    grid: int = DEFAULT_GRID,
) -> StabilityReport:
    """
    Locates the roots of h in ``window`` by Newton's method (analytic h') from a
    grid x grid lattice, checks completeness with the argument principle and
    subdivides the window where roots are missing.

    The verdict is "stable-on-finite-interval" only when every root found has a
    negative real part, the zero count matches the roots found, and the window
    provably holds every root with Re lambda >= 0.
    """
    window = window or Window.default_for(fd)
    if grid < 8:
        raise DomainError(f"grid must be at least 8, got {grid}")

    re = np.linspace(window.re_min, window.re_max, grid)
    im = np.linspace(-window.im_max, window.im_max, grid)
    starts = (re[None, :] + 1j * im[:, None]).ravel()
    roots = _conjugate_closed(_accept(fd, _newton(fd, starts), window))

    count = winding_count(fd, window)
    if count is None or count != len(roots):
        logger.debug("argument principle counts %s zeros, Newton found %d; refining", count, len(roots))
        extra = []
        for quadrant in window.quadrants():
            extra.extend(_refine(fd, quadrant, roots + extra, REFINE_DEPTH))
        roots = _conjugate_closed(roots + extra)
        if count is None:
            count = winding_count(fd, window)

    abs_sum = fd.abs_sum
    certified = window.certifies(abs_sum)
    max_real_part = max((z.real for z in roots), default=None)
    if count is None or count != len(roots):
        verdict = Verdict.inconclusive
    elif max_real_part is not None and max_real_part >= 0:
        verdict = Verdict.unstable
    elif certified:
        verdict = Verdict.stable
    else:
        verdict = Verdict.inconclusive
    if verdict is Verdict.inconclusive:
        logger.warning(
            "stability at x0=%r is inconclusive: %s zeros counted, %d roots found, window certified=%s",
            fd.x0, count, len(roots), certified,
        )

    return StabilityReport(
        roots=tuple(ComplexValue.from_complex(z) for z in roots),
        max_real_part=max_real_part,
        verdict=verdict,
        window=window,
        x0=fd.x0,
        zero_count=count,
        certified=certified,
    )
