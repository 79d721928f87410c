"""Exception types shared across the package.

The CLI maps these onto exit codes: input/format problems exit with 2,
numeric failures with 3.
"""


class SfmNetError(Exception):
    """Base class for package-specific errors."""


class DegenerateGeometryError(SfmNetError):
    """A direction vector is undefined because two points coincide."""


class StationaryWindowError(SfmNetError):
    """The most recent window displacement is too small to define a heading."""


class ExponentOverflowError(SfmNetError):
    """The repulsive-branch exponent would overflow."""


class NonFiniteGradientError(SfmNetError):
    """A gradient entry came out NaN or infinite."""


class TrainingDivergedError(SfmNetError):
    """Training loss blew past the divergence guard."""


class DatasetError(SfmNetError):
    """A dataset, scenario, or weight file is malformed or inconsistent."""


class TrackFormatError(SfmNetError):
    """A raw track table could not be parsed."""
