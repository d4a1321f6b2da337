"""Gram kernels of the dilated fractional-part system, their Muntz-type
series, and the arithmetic machinery around the associated quadratic forms.

Module map:
    constants   shared closed-form constants (K, K1, K2, Stieltjes data,
                zeta(2) derivatives, eta coefficients) and Bernoulli helpers
    muntz       R_1/R_2 remainder functions, the series S_1/S_2 with exact
                Bernoulli/Hurwitz tails, reciprocity, integral cross-checks
    gram        pointwise kernels G^(1), G^(2) in several representations,
                Vasyunin cotangent sums, the ratio-memoized Gram matrix
    arith       Mobius sieve, coefficient families (mu, lambda, nu), the
                L/M log-moment sums and their streamed trace tables
    quadform    F-terms, convolved S-sums, the inversion error E^(q), both
                quadratic-form routes, distance reports and wide-N sweeps
    identities  MacLeod-type exact identities, Phi bounds, a critical-strip
                zeta evaluator, zero ingestion, Perron zero sums
    cli         command-line interface over all of the above
"""

from . import arith, constants, gram, identities, muntz, quadform
from .errors import (DataFormatError, InvalidArgumentError, NumericalError,
                     ResourceLimitError)

__all__ = [
    "arith",
    "constants",
    "gram",
    "identities",
    "muntz",
    "quadform",
    "DataFormatError",
    "InvalidArgumentError",
    "NumericalError",
    "ResourceLimitError",
]
