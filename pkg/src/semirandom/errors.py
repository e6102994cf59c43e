"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Array dimensions do not agree with the operation's contract."""


class ParameterError(ValueError):
    """A configuration value is outside its valid range."""


class ParseError(ValueError):
    """A data file could not be parsed; the message carries the line number."""


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss."""
