"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: configuration problems exit
with 2, data validation failures with 3, training divergence with 4.
"""


class LesionSegError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(LesionSegError):
    """Invalid or inconsistent configuration."""


class RegistryError(ConfigError):
    """Unknown modality name or inconsistent modality declarations."""


class DataError(LesionSegError):
    """Data validation failure: missing files, shape mismatches, degenerate intensities."""


class TrainingDiverged(LesionSegError):
    """Non-finite loss encountered during optimization."""
