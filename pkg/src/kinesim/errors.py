"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataIntegrityError -> 3.
"""


class KinesimError(Exception):
    """Base class for all package errors."""


class ConfigError(KinesimError):
    """Invalid or infeasible configuration (bad shape parameters, zone layout,
    unknown experiment, ...)."""


class ZoneCapacityError(ConfigError):
    """Requested particle count exceeds the transmission-zone cell capacity."""

    def __init__(self, x: int, capacity: int):
        super().__init__(
            f"x={x} particles exceed the transmission-zone capacity of "
            f"{capacity} grid cells"
        )
        self.x = x
        self.capacity = capacity


class DataIntegrityError(KinesimError):
    """Trial records are inconsistent (y > x, malformed rows, ...)."""


class IncompleteDataError(DataIntegrityError):
    """Trial records do not cover every input symbol."""

    def __init__(self, missing):
        missing = sorted(missing)
        super().__init__(f"no trials recorded for x in {missing}")
        self.missing = missing
