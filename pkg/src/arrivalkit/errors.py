"""Exception types shared across the toolkit."""


class ArrivalkitError(Exception):
    pass


class ParseError(ArrivalkitError, ValueError):
    """A trace line could not be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyLogError(ArrivalkitError, ValueError):
    pass


class InsufficientDataError(ArrivalkitError, ValueError):
    """Too few events, intervals or points for the requested statistic."""


class FitError(ArrivalkitError, RuntimeError):
    """A parametric fit failed or is degenerate."""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)
