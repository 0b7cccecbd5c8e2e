"""Exception hierarchy.

Every error carries a stable machine-readable ``code`` that the command line
runner prints on the error stream.
"""


class TernstabError(Exception):
    """Base class for all package errors."""

    code = "E_INTERNAL"


class DimensionError(TernstabError, ValueError):
    """An element does not belong to the algebra it was used with."""

    code = "E_DIMENSION"

    def __init__(self, argument, expected, got):
        self.argument = argument
        self.expected = expected
        self.got = got
        super().__init__(
            f"argument {argument!r} has {got} coordinates, expected {expected}"
        )


class NonFiniteError(TernstabError, ValueError):
    code = "E_NONFINITE"


class PreconditionError(TernstabError, ValueError):
    """A documented precondition failed; ``witness`` holds the offending input."""

    code = "E_PRECONDITION"

    def __init__(self, message, witness=None, value=None):
        self.witness = witness
        self.value = value
        super().__init__(message)


class ParityError(PreconditionError):
    code = "E_PARITY"


class InadmissibleError(TernstabError, ValueError):
    """The requested control/exponent lies outside what the halving iteration covers."""

    code = "E_INADMISSIBLE"


class DivergenceError(TernstabError, ArithmeticError):
    code = "E_DIVERGENCE"

    def __init__(self, message, step=None, point=None):
        self.step = step
        self.point = point
        super().__init__(message)


class ConfigError(TernstabError):
    code = "E_CONFIG_UNREADABLE"


class SchemaError(ConfigError):
    code = "E_SCHEMA"


class OutputError(TernstabError, OSError):
    code = "E_OUTPUT"
