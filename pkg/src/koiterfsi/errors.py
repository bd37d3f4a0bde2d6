"""Exception hierarchy shared by all solver modules."""


class FSIError(Exception):
    """Base class for every error raised by koiterfsi."""


class ParameterError(FSIError, ValueError):
    """Invalid physical or numerical parameter."""


class MeshError(FSIError):
    """Degenerate, tangled or otherwise unusable mesh."""


class SolverError(FSIError):
    """A linear solve failed (singular or non-finite system)."""


class StepError(FSIError):
    """A time step could not be completed.

    ``step`` and ``time`` identify where the failure happened.
    """

    def __init__(self, message, step=None, time=None):
        self.step = step
        self.time = time
        where = []
        if step is not None:
            where.append(f"step {step}")
        if time is not None:
            where.append(f"t={time:.6g}s")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class ConfigError(FSIError, ValueError):
    """Bad configuration text or preset id.

    ``key`` names the offending configuration key, when there is one.
    """

    def __init__(self, message, key=None):
        self.key = key
        if key is not None and key not in message:
            message = f"{key}: {message}"
        super().__init__(message)


class DataError(FSIError, ValueError):
    """Input data does not satisfy a precondition (e.g. an open loop)."""
