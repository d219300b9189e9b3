"""Exception types raised by the estimation library."""


class Se3FilterError(Exception):
    """Base class for all library errors."""


class InvalidArgument(Se3FilterError, ValueError):
    """An input violates a documented precondition."""


class SingularAttitude(Se3FilterError, ArithmeticError):
    """An attitude sits on (or numerically at) the Tr(R) = -1 pole."""


class DegenerateGeometry(Se3FilterError, ValueError):
    """Vector measurements do not span enough directions to fix an attitude."""


class ConfigError(Se3FilterError, ValueError):
    """A scenario configuration failed to parse or validate."""
