"""Exception hierarchy shared by all modules."""


class NonlocalError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(NonlocalError, ValueError):
    """Invalid configuration; the message names the offending field."""

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class NonDivisibleEta(ConfigError):
    """Kernel support is not an integer number of cells."""


class InvalidKernel(NonlocalError, ValueError):
    pass


class OutOfRange(NonlocalError, ValueError):
    pass


class KernelGridMismatch(NonlocalError, ValueError):
    pass


class IncompatibleGrids(NonlocalError, ValueError):
    pass


class CflViolation(NonlocalError):
    pass


class DegenerateModel(NonlocalError):
    pass


class NonUnimodalFlux(NonlocalError, ValueError):
    pass
