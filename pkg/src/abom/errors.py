"""Exception types shared across the package."""


class AbomError(Exception):
    """Base class for every error this package raises deliberately."""


class HexDigestError(AbomError, ValueError):
    """A digest string does not match the canonical 10-hex-character form."""


class CapacityError(AbomError):
    """A filter chain or payload exceeded a protocol field limit."""


class CorruptPayloadError(AbomError):
    """An arithmetic-coded payload cannot be decoded back to its bits."""


class WireError(AbomError):
    """Base class for ABOM container parse failures."""


class NotAnAbomError(WireError):
    """Input does not start with the ABOM magic word."""


class UnsupportedVersionError(WireError):
    """The protocol version byte is not a supported value."""


class TruncatedError(WireError):
    """The declared payload length disagrees with the bytes present."""


class MalformedError(WireError):
    """A header field holds a value outside its legal range."""


class UnsupportedFormatError(AbomError):
    """The binary is not a format this tool can rewrite."""


class ElfStructureError(AbomError):
    """An ELF file's internal structure is inconsistent."""


class ArchiveError(AbomError):
    """An ar archive's member structure is inconsistent."""
