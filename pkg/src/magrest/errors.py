"""Exception types shared across the package."""


class MagrestError(Exception):
    """Base class for all package errors."""


class ConfigError(MagrestError, ValueError):
    """Invalid configuration or input file.

    ``line`` is the 1-based line (or CSV row) number when known.
    """

    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GeometryError(MagrestError, ValueError):
    pass


class SimulationError(MagrestError, ArithmeticError):
    """Integration produced a non-finite state."""

    def __init__(self, message, step=None, state=None):
        self.step = step
        self.state = state
        super().__init__(message)


class StiffnessGuardError(MagrestError, ValueError):
    """Time step too large for the fastest mode of the model."""


class IdentificationError(MagrestError):
    """A fit or extraction procedure could not produce a result.

    ``code`` is one of NO_PLATEAU, NO_MASS_ASYMPTOTE, NO_RESONANCE,
    NO_INDUCTIVE_ASYMPTOTE, NONCONVERGENCE, OUT_OF_RANGE, INSUFFICIENT_CYCLE.
    """

    def __init__(self, code, message=""):
        self.code = code
        super().__init__(f"{code}: {message}" if message else code)


class NegativeParameterWarning(UserWarning):
    """A fitted parameter wanted to go negative and was held at zero."""
