"""Exception types raised across the package."""


class GhostTrackError(Exception):
    """Base class for package errors."""


class DimensionError(GhostTrackError, ValueError):
    """Array or image shapes do not agree."""


class DomainError(GhostTrackError, ValueError):
    """A value lies outside the allowed domain (e.g. a non-binary pixel)."""


class PGMParseError(GhostTrackError, ValueError):
    """A PGM file header or body is malformed."""


class DegenerateSceneError(GhostTrackError, ValueError):
    """The ideal measurement vector carries no signal to calibrate against."""


class ProvenanceError(GhostTrackError, ValueError):
    """Two measurement vectors were not acquired with the same pattern set."""


class IntegrityError(GhostTrackError):
    """A stored artifact is missing or does not match its recorded hash."""


class ConfigError(GhostTrackError, ValueError):
    """A run configuration is invalid or references missing files."""
