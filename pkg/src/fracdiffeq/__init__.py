"""Discrete fractional calculus and resolvent families for fractional
difference equations of order ``1 < alpha <= 2``.

The functional core lives in the submodules (:mod:`.kernels`,
:mod:`.fracdiff`, :mod:`.linop`, :mod:`.resolvent`, :mod:`.poisson`,
:mod:`.solver`); :mod:`.estimators` wraps it in scikit-learn style classes.
"""

__version__ = "0.1.0"

from .estimators import (
    CaputoDifference,
    DiscreteResolvent,
    FractionalSum,
    RiemannLiouvilleDifference,
)
from .exceptions import (
    ConvergenceError,
    DomainError,
    ForcingError,
    FracDiffError,
    InadmissibleGrowthError,
    MethodInapplicableError,
    ResolventSetError,
    UsageError,
)
from .fracdiff import caputo_diff, frac_sum, rl_diff, rl_diff_of_conv
from .kernels import FracOrder, cesaro_kernel, conv, forward_diff, mittag_leffler, ztrans_partial
from .linop import DenseOperator, DiagonalOperator, Laplacian1D, LinOperator, operator_from_descriptor
from .poisson import QuadratureSpec, TimeFunction, parse_function, poisson_transform
from .resolvent import ResolventFamily, beta_coefficients, build_family, verify_ztransform
from .solver import (
    ProblemSpec,
    StateForcing,
    residual,
    solve,
    solve_homogeneous,
    solve_inhomogeneous,
    solve_nonlinear_direct,
    solve_nonlinear_picard,
)
from .weights import WeightedSpace, admissibility, weighted_norm

__all__ = [
    "__version__",
    "FractionalSum", "RiemannLiouvilleDifference", "CaputoDifference", "DiscreteResolvent",
    "FracDiffError", "DomainError", "UsageError", "ConvergenceError", "ResolventSetError",
    "MethodInapplicableError", "InadmissibleGrowthError", "ForcingError",
    "frac_sum", "rl_diff", "caputo_diff", "rl_diff_of_conv",
    "FracOrder", "cesaro_kernel", "conv", "forward_diff", "mittag_leffler", "ztrans_partial",
    "LinOperator", "DenseOperator", "DiagonalOperator", "Laplacian1D", "operator_from_descriptor",
    "QuadratureSpec", "TimeFunction", "parse_function", "poisson_transform",
    "ResolventFamily", "beta_coefficients", "build_family", "verify_ztransform",
    "ProblemSpec", "StateForcing", "residual", "solve", "solve_homogeneous",
    "solve_inhomogeneous", "solve_nonlinear_direct", "solve_nonlinear_picard",
    "WeightedSpace", "admissibility", "weighted_norm",
]
