"""Exception types shared across the library."""


class NaptronError(Exception):
    """Base class for every error this library raises on purpose."""


class InputError(NaptronError):
    """Invalid values: non-finite activations, bad indices, degenerate boxes."""


class ConfigError(NaptronError):
    """Invalid configuration parameter (thresholds, percentiles, flags)."""


class DimensionError(NaptronError):
    """Pattern or vector lengths do not line up."""


class StateError(NaptronError):
    """Store misuse: mutating a frozen store, persisting an unfrozen one."""


class EmptyClassError(NaptronError):
    """A distance query hit a class with no stored patterns."""


class DataError(NaptronError):
    """Malformed or inconsistent dataset / store file content."""


class BuildError(DataError):
    """Store construction admitted no training sample for any class."""


class UndefinedMetricError(NaptronError):
    """A metric has no defined value for the given inputs (empty side)."""
