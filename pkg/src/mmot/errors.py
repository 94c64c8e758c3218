"""Exception hierarchy for the package.

Input problems derive from :class:`InputError` (a ``ValueError``), solver
problems from :class:`SolverError`. The CLI maps the first family to exit
code 1 and the second to exit code 2.
"""


class MMOTError(Exception):
    """Base class for all package errors."""


class InputError(MMOTError, ValueError):
    """Malformed or inconsistent problem data."""


class DimensionMismatch(InputError):
    pass


class SupportSizeMismatch(InputError):
    pass


class EmptyMeasure(InputError):
    pass


class NonFiniteCoordinate(InputError):
    pass


class SizeOverflow(InputError):
    """A dense tensor would exceed the configured entry cap."""


class EnumerationOverflow(InputError):
    """Too many Monge assignments to enumerate."""


class NotTwoPoint(InputError):
    pass


class NotOneDimensional(InputError):
    pass


class InfeasibleCoupling(InputError):
    pass


class SolverError(MMOTError, RuntimeError):
    """The LP solver failed; for well-formed input this indicates a bug."""


class Infeasible(SolverError):
    pass


class IterationLimit(SolverError):
    pass


class CertificateInvalid(SolverError):
    pass


class EmptyHistogram(UserWarning):
    """Emitted when a histogram is exported with no failures to bin."""
