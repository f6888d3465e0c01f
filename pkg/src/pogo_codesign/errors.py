"""Exception types raised across the package."""


class PogoError(Exception):
    """Base class for all package errors."""


class NonFiniteState(PogoError):
    """The integrator produced a NaN or infinite state (usually an unstable step)."""


class EmptyTrajectory(PogoError):
    pass


class SaturationViolation(PogoError):
    """A command would exceed the actuator velocity or acceleration limit."""


class StrokeViolation(PogoError):
    """A command would move the actuator outside its stroke."""


class InvalidTarget(PogoError):
    pass


class BufferUnderflow(PogoError):
    """Fewer transitions are stored than one batch needs."""


class ConfigError(PogoError):
    pass


class FingerprintMismatch(PogoError):
    """Artifacts were produced by different command or simulation settings."""
