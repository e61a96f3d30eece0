"""Exception types shared across the simulator."""


class BevSimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(BevSimError):
    """Malformed or invalid vehicle configuration."""


class CycleError(BevSimError):
    """Malformed or invalid drive-cycle data."""


class EnvelopeError(BevSimError):
    """Motor operating point outside the torque/speed envelope."""


class DegenerateVoltageError(BevSimError):
    """Battery terminal voltage below the 1 V floor; current is undefined."""


class UnreachableTargetError(BevSimError):
    """Requested speed cannot be reached under the force balance."""


class PlotError(BevSimError):
    """Plot cannot be produced (empty data or I/O failure)."""
