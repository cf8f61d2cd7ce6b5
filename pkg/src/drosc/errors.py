"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes (config 2, numeric 3, truncation 4).
"""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class NumericError(RuntimeError):
    """A numerical routine failed to reach its accuracy target."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class UnphysicalStateError(ValueError):
    """Moments violate the Heisenberg floor V_x V_p - C_xp^2 >= 1."""


class TruncationError(RuntimeError):
    """Fock-space dimension too small for the requested evolution."""

    def __init__(self, message, tau=None, dim=None):
        super().__init__(message)
        self.tau = tau
        self.dim = dim


class AnsatzValidityError(RuntimeError):
    """Product-ansatz parametrization left its validity region z in (0,1)."""


class ConfigError(ValueError):
    """Invalid or unknown entry in a run configuration."""
