"""Exception types shared across the simulator."""


class GreenflError(Exception):
    """Base class for all simulator errors."""


class ConfigError(GreenflError):
    """Run configuration failed validation.

    `field_path` is a dotted path to the offending field, e.g. "partition.alpha".
    """

    def __init__(self, field_path, message):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}")


class OverlappingSpan(GreenflError):
    """A task span was opened while another span is still open for the site."""


class DuplicateInit(GreenflError):
    """A second init span was opened for a site that already recorded one."""


class ClockRegression(GreenflError):
    """A span was closed at a sim-clock time before its start."""


class UnknownSite(GreenflError):
    """Ledger lookup for a site that never opened a span."""


class OpenSpanPending(GreenflError):
    """Totals requested while a span is still open."""


class EmptyDataset(GreenflError):
    """Partitioning requested on a dataset with no samples."""


class InvalidAlpha(GreenflError):
    """Dirichlet concentration must be strictly positive."""


class EmptyClientData(GreenflError):
    """Training or evaluation invoked with no samples."""


class ShapeMismatch(GreenflError):
    """Model updates with inconsistent parameter shapes."""


class EmptyUpdateSet(GreenflError):
    """Aggregation invoked with no updates."""


class SchemaViolation(GreenflError):
    """A round record does not conform to the reporting schema.

    `field` names the offending schema field.
    """

    def __init__(self, field, message=None):
        self.field = field
        super().__init__(message or field)


class UnknownRegion(GreenflError):
    """Grid remapping referenced a region with no configured intensity."""


class CalibrationFailed(GreenflError):
    """Tier calibration could not reach the requested targets."""
