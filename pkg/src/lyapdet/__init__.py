"""Lyapunov exponents of dominated matrix cocycles from periodic orbits.

The top exponent over a g-measure on a subshift of finite type is read off
the Fredholm determinant of a transfer operator whose traces are sums over
periodic points; see :func:`estimate` for the one-call entry point.
"""
from .cocycle import (
    INF,
    CallableCocycle,
    CallableG,
    ConstantCocycle,
    ConstantG,
    RunLengthCocycle,
    TableCocycle,
    TableG,
    birkhoff_sum_log_g,
    cocycle_product,
    eval_A,
    eval_g,
    paper_example,
    variation_estimate,
)
from .determinant import (
    DeterminantCoefficients,
    EstimateReport,
    decay_diagnostic,
    estimate_report,
    fredholm_coefficients,
    fredholm_coefficients_derivative,
    lyapunov_estimate,
    pressure_estimate,
)
from .errors import (
    ConfigError,
    DegenerateDenominator,
    Insufficient,
    NoRoot,
    NormalizationError,
    NotDominated,
    ReducibleShiftError,
)
from .matrix import (
    PrecisionContext,
    charpoly_derivative_at,
    domination_diagnostic,
    entrywise_norm,
    leading_eigenvalue,
    spectral_radius,
)
from .sft import (
    PeriodicPoint,
    TransitionMatrix,
    admissible_words,
    is_irreducible,
    periodic_points,
    topological_entropy,
)
from .traces import (
    TraceCache,
    TraceSequence,
    compute_traces,
    naive_estimate,
    naive_estimates,
    trace_general_beta,
    trace_pair,
)

__version__ = "0.1.0"


def estimate(T, g, c, N=8, cache=None, executor=None):
    """Lyapunov estimates for periods ``1..N`` at the current precision.

    Checks the g-function normalization first and returns an
    :class:`EstimateReport`; ``report.final`` is the order-``N`` estimate.
    """
    g.check_normalized(T)
    ts = compute_traces(T, g, c, N, cache=cache, executor=executor)
    return estimate_report(ts, N)
