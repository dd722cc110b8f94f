from .delay_spec import DelaySpec
from .djm import DelayRHS, apriori_bound, djm_iterate, djm_symbolic_linear_terms
from .errors import (
    BlowUpError,
    ConvergenceError,
    DomainError,
    ExpressionError,
    PantographError,
    RectangleEscapeError,
    SeriesRangeError,
    TruncationError,
    UsageError,
)
from .fractional import caputo_l1_residual, evaluate_fractional, log_gamma, mittag_leffler
from .grid import GridSolution, InterpolatedValue
from .integrator import convergence_order, integrate
from .series import (
    ComplexValue,
    SeriesValue,
    coefficient_product,
    evaluate,
    evaluate_addition,
    evaluate_complex,
    evaluate_derivative,
    sandwich_bounds,
)
from .stability import (
    FrozenDelays,
    StabilityReport,
    Verdict,
    Window,
    char_fn,
    find_roots,
    frozen_from_spec,
)

__all__ = [
    "BlowUpError",
    "ComplexValue",
    "ConvergenceError",
    "DelayRHS",
    "DelaySpec",
    "DomainError",
    "ExpressionError",
    "FrozenDelays",
    "GridSolution",
    "InterpolatedValue",
    "PantographError",
    "RectangleEscapeError",
    "SeriesRangeError",
    "SeriesValue",
    "StabilityReport",
    "TruncationError",
    "UsageError",
    "Verdict",
    "Window",
    "apriori_bound",
    "caputo_l1_residual",
    "char_fn",
    "coefficient_product",
    "convergence_order",
    "djm_iterate",
    "djm_symbolic_linear_terms",
    "evaluate",
    "evaluate_addition",
    "evaluate_complex",
    "evaluate_derivative",
    "evaluate_fractional",
    "find_roots",
    "frozen_from_spec",
    "integrate",
    "log_gamma",
    "mittag_leffler",
    "sandwich_bounds",
]
