"""Exception hierarchy.

Every documented failure mode raises a distinct, catchable class so callers
(and the acceptance suite) can tell degenerate inputs apart from bugs.
"""

from __future__ import annotations


class CpodriftError(Exception):
    """Base class for all toolkit errors."""


class InputError(CpodriftError, ValueError):
    """Invalid or non-finite input values, mismatched lengths, unsorted traces."""


class DegenerateMapError(InputError):
    """Affine map cannot be inverted (zero slope)."""


class StepSizeError(InputError):
    """Non-positive integration step."""


class SliceViolationError(CpodriftError):
    """Look-ahead horizon (plus overhead budget) does not fit inside the
    scheduler execution slice."""


class MissingHintError(CpodriftError):
    """Predictive controller stepped without a hint forecast."""


class InsufficientDataError(CpodriftError):
    """Estimator input lacks the variance or coverage needed for a fit."""


class ExtractionError(CpodriftError):
    """Time-constant extraction failed (constant or non-rising trace)."""


class CoverageError(CpodriftError):
    """Telemetry does not cover the required load states.

    ``missing`` lists the absent state names.
    """

    def __init__(self, message: str, missing: tuple[str, ...] = ()):
        super().__init__(message)
        self.missing = missing


class ImplausibleInputError(InputError):
    """Physically implausible quantity (e.g. savings larger than baseline)."""


class ConfigError(CpodriftError):
    """Invalid run configuration; message carries the dotted field path."""


class UsageError(CpodriftError):
    """Unknown experiment or CLI usage problem."""
