"""Exception types shared across the solver."""


class ConfigError(ValueError):
    """Invalid configuration: bad mesh pairing, unknown keys, bad parameters."""


class DomainError(ValueError):
    """Argument outside the admissible domain of an operation (e.g. a point
    outside a cell, a non-unit normal)."""


class AdmissibilityError(RuntimeError):
    """A fluid state violated rho > 0 or p >= -pi.

    Carries context (where the state was encountered) so a failing run can be
    traced back to a cell, face quadrature point or time instance.
    """

    def __init__(self, message, **context):
        self.context = dict(context)
        if context:
            ctx = ", ".join(f"{k}={v}" for k, v in context.items())
            message = f"{message} [{ctx}]"
        super().__init__(message)


class OracleError(RuntimeError):
    """The test-only nonlinear root finder failed to converge."""
