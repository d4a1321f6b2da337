"""Error taxonomy shared across the package.

invalid argument  -> InvalidArgumentError (bad domain, unknown kind, ...)
resource limit    -> ResourceLimitError (term counts / refinement depth
                     needed for a requested tolerance exceed the caps)
data format       -> DataFormatError (malformed zeros file and friends)
numerical failure -> NumericalError (e.g. zeta'(rho) vanishing in a
                     denominator)
"""


class InvalidArgumentError(ValueError):
    pass


class ResourceLimitError(RuntimeError):
    pass


class DataFormatError(ValueError):
    pass


class NumericalError(ArithmeticError):
    pass
