"""Exception types raised by hyperpack.

Everything derives from :class:`HyperpackError`. The CLI maps
:class:`FormatError` (and ``OSError``) to exit code 2 and every other
:class:`HyperpackError` to exit code 1.
"""


class HyperpackError(Exception):
    """Base class for all library errors."""


class DegenerateVector(HyperpackError):
    """A vector is too short to be projected onto the sphere."""


class DimensionMismatch(HyperpackError):
    pass


class TooFewPoints(HyperpackError):
    pass


class NonFiniteGradient(HyperpackError):
    pass


class GalleryTooSmall(HyperpackError):
    pass


class EmptyGallery(HyperpackError):
    pass


class BatchTooSmall(HyperpackError):
    pass


class TooManyBatches(HyperpackError):
    pass


class UnstableSelection(HyperpackError):
    """The min pair or a nearest-gallery index flips under a finite-difference probe."""


class IdentityMismatch(HyperpackError):
    pass


class MalformedTrace(HyperpackError):
    pass


class ConfigError(HyperpackError):
    pass


class NormViolation(HyperpackError):
    pass


class FormatError(HyperpackError):
    """Base for on-disk format problems."""


class BadMagic(FormatError):
    pass


class UnsupportedVersion(FormatError):
    pass


class TruncatedPayload(FormatError):
    pass
