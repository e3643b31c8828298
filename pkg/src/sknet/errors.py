"""Exception hierarchy shared by all sknet modules."""


class SknetError(Exception):
    """Base class for all errors raised by sknet."""


class DimensionError(SknetError):
    """Operands have incompatible shapes."""


class ParameterError(SknetError):
    """A parameter is outside its documented domain."""


class ConstructionError(SknetError):
    """Raw arrays or edges cannot form a valid sparse matrix."""


class ParseError(SknetError):
    """A text stream cannot be parsed into a graph.

    Carries the 1-based line number when one is known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FormatError(SknetError):
    """A binary payload violates the container format.

    Carries the byte offset at which decoding failed.
    """

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)


class FetchError(SknetError):
    """A remote download failed; the cache was left untouched."""


class DegenerateInputError(SknetError):
    """The input graph is degenerate for the requested operation."""


class ConvergenceError(SknetError):
    """An iterative solver did not reach its tolerance.

    ``residuals`` holds the residual norms observed at the final step.
    """

    def __init__(self, message, residuals=None):
        self.residuals = residuals
        super().__init__(message)
