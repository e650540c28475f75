"""Exception types raised by the faceaes library."""


class FaceAesError(Exception):
    """Base class for all faceaes errors."""


class FvecFormatError(FaceAesError):
    """Feature file is malformed: bad magic, version, header, or truncation."""


class ChecksumError(FvecFormatError):
    """Feature file payload does not match its trailing CRC-32."""


class DimMismatchError(FaceAesError, ValueError):
    """A feature dimensionality differs from what was declared or required."""


class NonFiniteError(FaceAesError, ValueError):
    """NaN or infinity encountered where finite values are required."""


class RowCountError(FaceAesError, ValueError):
    """A feature block's row count disagrees with the manifest sample count."""


class ManifestError(FaceAesError, ValueError):
    """Dataset manifest is malformed or violates its invariants."""


class SingleClassError(FaceAesError, ValueError):
    """Classification labels contain only one class."""


class UndefinedCorrelationError(FaceAesError, ValueError):
    """Pearson correlation is undefined because an input has zero variance."""


class ProtocolError(FaceAesError, RuntimeError):
    """The cross-validation protocol hit an unusable fold."""
