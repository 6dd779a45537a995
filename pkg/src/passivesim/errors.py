"""Exception hierarchy shared by all modules.

The CLI maps these classes onto exit codes, so new error types should
subclass one of the two roots below.
"""


class InputError(ValueError):
    """Invalid user-supplied data (files, parameters, models)."""


class WeatherFormatError(InputError):
    """A weather CSV could not be parsed or violates a record invariant."""

    def __init__(self, message, line=None, field=None):
        self.message = message
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class ModelError(InputError):
    """A building model or transformation argument is invalid."""


class SimulationError(RuntimeError):
    """Numerical failure during a simulation run."""


class ConvergenceError(SimulationError):
    """The airflow Newton iteration did not converge."""

    def __init__(self, message, residuals=None):
        self.residuals = residuals
        super().__init__(message)


class SingularSystemError(SimulationError):
    """The assembled thermal system could not be factorised."""
