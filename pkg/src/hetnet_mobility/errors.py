"""Exception hierarchy shared by the analytic, simulation and CLI layers."""


class HetnetError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(HetnetError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class DivergenceError(DomainError):
    """An interference integral does not converge (path-loss exponent <= 2)."""


class QuadratureError(HetnetError, RuntimeError):
    """Adaptive quadrature failed to meet the requested tolerance."""

    def __init__(self, message, value=None, abserr=None):
        super().__init__(message)
        self.value = value
        self.abserr = abserr


class InfeasibleBiasError(HetnetError, ValueError):
    """The bias linear system produced a non-positive solution."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class OptimizerError(HetnetError, RuntimeError):
    """The association optimizer did not converge; carries the best iterate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class EmptyWindowError(HetnetError):
    """A simulated tier has no access point inside the simulation window."""


class ConfigError(HetnetError, ValueError):
    """A scenario file or CLI option is invalid."""

    def __init__(self, message, field=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
        self.field = field
        self.line = line
