"""Exception hierarchy shared by every module."""


class DixmierError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(DixmierError, ValueError):
    """An argument lies outside the domain of the operation."""


class ResourceError(DixmierError, RuntimeError):
    """A lazy generator ran past its piece budget."""


class NumericalError(DixmierError, ArithmeticError):
    """An iteration failed to converge or a numerical estimate is unstable."""


class PreconditionError(DixmierError, ValueError):
    """The inputs do not satisfy the hypothesis an operation relies on."""


class InvariantError(DixmierError, ValueError):
    """An input object violates one of its structural invariants."""
