"""Expected number of draws to observe k distinct values of a finite distribution.

Exact (tuple enumeration, subset Markov chain, max-min inclusion-exclusion,
uniform closed form), simulated, and asymptotic (Heaps-law) routes, plus the
dual quantity: expected distinct values among n draws.
"""

__version__ = "0.1.0"

from .distribution import (
    MandelbrotParams,
    ProbabilityVector,
    mandelbrot,
    mandelbrot_pmf,
    normalization_limit,
    read_pmf_file,
    uniform_pmf,
)
from .exact import (
    ExpectationRow,
    ExpectationTable,
    Method,
    expected_completion_maxmin,
    expected_distinct_records,
    expected_draws,
    expected_draws_dp,
    expected_draws_naive,
    expected_draws_uniform,
    expected_increment_naive,
)
from .exceptions import (
    DivergentSeriesError,
    InfeasibleTargetError,
    InsufficientReplicatesError,
    InvalidDistributionError,
    RecordCollectorError,
    ResourceLimitError,
    RunawaySimulationError,
)
from .heaps import (
    HeapsApprox,
    alpha_coefficient,
    approx_expected_draws,
    approx_expected_records,
    gamma_fn,
    simulated_validity_threshold,
    validity_threshold,
)
from .montecarlo import (
    SimulationEstimate,
    draw_until_k_distinct,
    estimate_expected_draws,
    estimate_expected_records,
    estimate_record_curve,
    replicate_rng,
)
