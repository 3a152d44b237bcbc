"""Exception types raised across the package."""


class ConfigurationError(ValueError):
    """Invalid mesh, kernel or run configuration."""


class InputError(ValueError):
    """Bad numerical input (non-finite samples, non-neutral charge, ...)."""


class DomainError(ValueError):
    """A point lies outside the computational domain."""


class UsageError(RuntimeError):
    """An operator was called for a system it does not apply to."""


class DivergenceError(RuntimeError):
    """Non-finite values appeared during time integration."""

    def __init__(self, t: float, dt: float, message: str = "non-finite state"):
        super().__init__(f"{message} at t={t:.6g} (dt={dt:.6g})")
        self.t = t
        self.dt = dt
