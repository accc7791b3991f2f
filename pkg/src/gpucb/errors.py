"""Exception types shared across the package."""


class GPUCBError(Exception):
    """Base class for all package errors."""


class ConfigurationError(GPUCBError, ValueError):
    """A kernel, schedule, or experiment was configured with invalid parameters."""


class InputError(GPUCBError, ValueError):
    """Data passed to an operation is malformed (non-finite, mismatched shapes)."""


class NumericalError(GPUCBError, ArithmeticError):
    """A factorization or quadratic form broke down beyond roundoff tolerance."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class UnsupportedOperation(GPUCBError, TypeError):
    """The operation needs structure the kernel does not provide (e.g. a feature map)."""
