"""Exception hierarchy.

Usage-type problems (bad sizes, bad parameters, unparseable files) and
numeric-domain problems are kept apart so the CLI can map them to distinct
exit codes.
"""


class IsingError(Exception):
    """Base class for all package errors."""


class InvalidSizeError(IsingError, ValueError):
    pass


class InvalidParameterError(IsingError, ValueError):
    pass


class DimensionMismatchError(IsingError, ValueError):
    pass


class DegreeMismatchError(IsingError, ValueError):
    def __init__(self, vertex, degree, expected):
        self.vertex = vertex
        self.degree = degree
        self.expected = expected
        super().__init__(
            f"vertex {vertex} has degree {degree}, expected {expected}"
        )


class ParseError(IsingError, ValueError):
    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class CapacityError(IsingError, ValueError):
    """Raised when an exact (enumeration-based) routine is asked for too many spins."""


class DomainError(IsingError, ValueError):
    """A parameter lies outside the region where a formula is valid."""


class NotApplicableError(IsingError, ValueError):
    pass
