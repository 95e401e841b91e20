"""Exception types shared across the estimation pipeline."""


class EstimationError(Exception):
    """Base class for all errors raised by this package."""


class NotSkew(EstimationError):
    """Matrix handed to vex() is not skew-symmetric within tolerance."""


class ConfigError(EstimationError):
    """Invalid or inconsistent configuration value."""


class ParseError(EstimationError):
    """Malformed config or log file; message carries the line number."""


class UnknownBeacon(EstimationError):
    """Beacon id not present in the beacon map."""


class InsufficientVectors(EstimationError):
    """Too few measured vectors to determine attitude or position."""


class RankDeficient(EstimationError):
    """Stacked point-velocity system does not determine a unique twist."""


class NoConvergence(EstimationError):
    """Iterative solve failed to reach tolerance within the iteration cap."""
