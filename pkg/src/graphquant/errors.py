"""Exception hierarchy shared by all graphquant modules."""


class GraphQuantError(Exception):
    """Base class; ``code`` is the machine-readable name printed by the CLI."""

    @property
    def code(self) -> str:
        return type(self).__name__


class OrderExceedsBound(GraphQuantError, ValueError):
    pass


class DimensionMismatch(GraphQuantError, ValueError):
    pass


class ExactLimitExceeded(GraphQuantError, ValueError):
    pass


class NumericalError(GraphQuantError, ArithmeticError):
    pass


class DiscontinuousDistortion(GraphQuantError, ValueError):
    pass


class InsufficientData(GraphQuantError, ValueError):
    pass


class InvalidEdge(GraphQuantError, ValueError):
    pass


class ParseError(GraphQuantError, ValueError):
    """Malformed input file; carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)
