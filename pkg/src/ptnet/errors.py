"""Exception hierarchy shared by all ptnet modules."""


class PTError(Exception):
    """Base class for every error raised by ptnet."""


class ArgumentError(PTError, ValueError):
    """An argument is out of range or structurally invalid."""


class DimensionError(PTError, ValueError):
    """Tensor extents or Hilbert/Liouville dimensions do not match."""


class ModelError(PTError, ValueError):
    """A physical model violates its contract (e.g. non-Hermitian H)."""


class NumericError(PTError, ArithmeticError):
    """A numerical routine failed to converge or produced non-finite data."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class ConfigError(PTError, ValueError):
    """A run configuration failed to parse or validate.

    ``problems`` lists every failure found, not just the first.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class TailMassWarning(UserWarning):
    """Thermal Fock-space truncation discards more weight than allowed."""

    def __init__(self, message, tail=0.0):
        super().__init__(message)
        self.tail = tail


class FormatError(PTError, OSError):
    """A file could not be read or does not hold the expected format."""
