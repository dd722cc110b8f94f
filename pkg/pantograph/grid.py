import math
from typing import Optional, Union

import numpy as np
from pydantic import Field, root_validator, validator
from scipy.interpolate import PchipInterpolator

from pantograph.base_model import FrozenModel
from pantograph.errors import DomainError


def uniform_nodes(b: float, N: int) -> np.ndarray:
    """x_k = k b / N, k = 0..N"""
    return np.linspace(0.0, b, N + 1)


def monotone_interpolant(b: float, values: np.ndarray) -> PchipInterpolator:
    """Fritsch-Carlson monotone cubic through the grid values; never overshoots the data"""
    return PchipInterpolator(uniform_nodes(b, len(values) - 1), values, extrapolate=False)


class InterpolatedValue(FrozenModel):
    x: float
    value: float


class GridSolution(FrozenModel):
    """
    A solution sampled at x_k = k b / N on [0, b].

    ``iteration_count``, ``certified_error`` and ``increment_norms`` are filled
    by the DJM solver; a marching integrator leaves them at their defaults.
    """

    b: float = Field(..., gt=0)
    N: int = Field(..., ge=2)
    values: np.ndarray
    iteration_count: int = Field(0, ge=0)
    certified_error: Optional[float] = Field(None, ge=0)
    increment_norms: tuple = ()

    @validator("values", pre=True)
    def _as_read_only_array(cls, values):
        array = np.array(values, dtype=float)
        array.setflags(write=False)
        return array

    @root_validator(skip_on_failure=True)
    def _one_value_per_node(cls, fields):
        if fields["values"].shape != (fields["N"] + 1,):
            raise ValueError(
                f"expected {fields['N'] + 1} node values, got shape {fields['values'].shape}"
            )
        return fields

    @property
    def nodes(self) -> np.ndarray:
        return uniform_nodes(self.b, self.N)

    @property
    def step(self) -> float:
        return self.b / self.N

    def __call__(self, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """monotone cubic interpolation, exact at the nodes"""
        result = monotone_interpolant(self.b, self.values)(x)
        if np.any(np.isnan(result)):
            raise DomainError(f"interpolation outside [0, {self.b!r}]")
        return float(result) if np.ndim(result) == 0 else result

    def interpolate(self, x: float) -> InterpolatedValue:
        if not (0.0 <= x <= self.b):
            raise DomainError(f"x={x!r} lies outside [0, {self.b!r}]")
        k = x / self.step
        if math.isclose(k, round(k), rel_tol=0.0, abs_tol=1e-12):
            # node: return the stored value itself
            return InterpolatedValue(x=x, value=float(self.values[int(round(k))]))
        return InterpolatedValue(x=x, value=self(x))

    def at_end(self) -> float:
        return float(self.values[-1])

    def __hash__(self):
        return hash((self.b, self.N, self.values.tobytes()))

    def __eq__(self, other):
        if not isinstance(other, GridSolution):
            return NotImplemented
        return (self.b, self.N) == (other.b, other.N) and np.array_equal(self.values, other.values)
