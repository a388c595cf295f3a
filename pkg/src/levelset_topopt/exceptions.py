class ConfigurationError(ValueError):
    """Invalid geometry, case data or command-line overrides."""


class AssemblyError(RuntimeError):
    """Finite element assembly hit a degenerate element."""


class SolverError(RuntimeError):
    """A linear system could not be solved to the required residual."""
