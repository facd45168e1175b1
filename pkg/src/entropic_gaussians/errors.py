"""Exception hierarchy shared by all modules."""


class EntropicOTError(Exception):
    """Base class for errors raised by this package."""


class NotSPDError(EntropicOTError, ValueError):
    """Matrix is not symmetric positive definite."""


class DimensionError(EntropicOTError, ValueError):
    """Operands have incompatible dimensions."""


class ParameterError(EntropicOTError, ValueError):
    """A scalar parameter lies outside its admissible range."""


class AmbiguityError(EntropicOTError, ValueError):
    """The requested object is not uniquely defined for this input."""


class ConvergenceError(EntropicOTError, RuntimeError):
    """An iterative solver failed to converge."""

    def __init__(self, message, *, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class CouplingError(EntropicOTError, RuntimeError):
    """An assembled coupling failed an internal consistency check."""


class CoverageError(EntropicOTError, ValueError):
    """A discretization grid does not cover the distribution adequately."""


class StepSizeError(EntropicOTError, RuntimeError):
    """Gradient descent produced a non-finite objective."""

    def __init__(self, message, *, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class EmbeddingError(EntropicOTError, ValueError):
    """A dissimilarity matrix admits no nontrivial Euclidean embedding."""


class ConfigError(EntropicOTError, ValueError):
    """An experiment configuration is invalid."""
