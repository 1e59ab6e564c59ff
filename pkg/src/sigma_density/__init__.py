"""Certified density bounds for divisor-sum comparisons along progressions."""

from .bounds import (
    BoundParams,
    BoundsReport,
    ConsistencyError,
    LambdaTable,
    PairBound,
    ProblemSpec,
    StabilityError,
    admissible,
    compute_bounds,
    decimal_str,
    ds_formula,
    ds_local,
    lambda_table,
    lambda_upper,
    pair_bounds,
)
from .empirical import (
    EmpiricalEstimate,
    RangeSigma,
    empirical_density,
    empirical_pair_density,
    progression_mean_hs,
    sigma_range,
    tie_count,
)
from .numth import (
    BigRational,
    Factorization,
    abundancy_pow,
    factorize,
    sieve_primes,
    sigma,
    smooth_numbers,
    smooth_part,
    valuation,
)

__version__ = "0.1.0"

__all__ = [
    "BigRational",
    "BoundParams",
    "BoundsReport",
    "ConsistencyError",
    "EmpiricalEstimate",
    "Factorization",
    "LambdaTable",
    "PairBound",
    "ProblemSpec",
    "RangeSigma",
    "StabilityError",
    "abundancy_pow",
    "admissible",
    "compute_bounds",
    "decimal_str",
    "ds_formula",
    "ds_local",
    "empirical_density",
    "empirical_pair_density",
    "factorize",
    "lambda_table",
    "lambda_upper",
    "pair_bounds",
    "progression_mean_hs",
    "sieve_primes",
    "sigma",
    "sigma_range",
    "smooth_numbers",
    "smooth_part",
    "tie_count",
    "valuation",
]
