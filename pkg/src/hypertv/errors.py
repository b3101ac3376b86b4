"""Exception types shared across the package."""


class HypertvError(Exception):
    """Base class for every error raised by this package."""


class ParseError(HypertvError):
    """A file could not be parsed. Carries the offending path and line number."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = str(path)
        if line is not None:
            prefix += f":{line}"
        super().__init__(f"{prefix}: {message}" if prefix else message)


class ValidationError(HypertvError):
    """An input violates a documented invariant or contract."""


class OracleBudgetError(ValidationError):
    """A dense-tensor request exceeds the size budget reserved for test oracles."""


class DivergenceError(HypertvError):
    """Gradient descent produced a non-finite objective or gradient."""

    def __init__(self, iteration):
        self.iteration = iteration
        super().__init__(
            f"non-finite objective or gradient at iteration {iteration}; "
            "reduce the step size or enable projection"
        )
