"""36-bit SHAKE128 content digests and their filter index slices.

A file is identified by the first 36 bits of the SHAKE128 extendable
output over its raw bytes. The 36 bits split exactly into two 18-bit
filter indices, so no further hashing is ever needed to address a
filter.
"""

from __future__ import annotations

import hashlib
import string
from os import PathLike
from typing import NamedTuple, Union

from .errors import HexDigestError

DIGEST_BITS = 36
INDEX_BITS = 18

_LIMIT = 1 << DIGEST_BITS
_INDEX_MASK = (1 << INDEX_BITS) - 1
_CHUNK = 1 << 16
_HEXDIGITS = set(string.hexdigits)


class Digest36(int):
    """A 36-bit digest value.

    Behaves as a plain integer in [0, 2**36); equality and ordering are
    value-based. Construction rejects out-of-range values.
    """

    __slots__ = ()

    def __new__(cls, value: int) -> "Digest36":
        value = int(value)
        if not 0 <= value < _LIMIT:
            raise ValueError(f"digest value outside 36-bit range: {value:#x}")
        return super().__new__(cls, value)

    def __repr__(self) -> str:
        return f"Digest36({to_hex(self)!r})"


class IndexPair(NamedTuple):
    """The two 18-bit filter indices sliced from one digest."""

    hi: int
    lo: int


def hash_bytes(data: bytes) -> Digest36:
    """Digest a byte string.

    Takes the 5-byte SHAKE128 output prefix big-endian bytewise and
    drops the lowest 4 bits, keeping the first 36 bits of the stream.
    """
    prefix = hashlib.shake_128(data).digest(5)
    return Digest36(int.from_bytes(prefix, "big") >> 4)


def hash_file(path: Union[str, PathLike]) -> Digest36:
    """Digest a file's exact byte content.

    Streams the file in fixed-size chunks, so memory use is independent
    of file size. No newline or encoding normalization is applied.
    """
    h = hashlib.shake_128()
    with open(path, "rb") as fh:
        while chunk := fh.read(_CHUNK):
            h.update(chunk)
    return Digest36(int.from_bytes(h.digest(5), "big") >> 4)


def to_hex(digest: int) -> str:
    """Render a digest as exactly 10 lowercase hex characters.

    The 36 bits are left-aligned in 40, so the final character always
    contributes a zero low nibble (e.g. ``7f9c2ba4e0``).
    """
    return format(int(digest) << 4, "010x")


def from_hex(text: str) -> Digest36:
    """Parse the canonical 10-character hex rendering, case-insensitively.

    Rejects any other length, non-hex characters, and a nonzero
    trailing nibble. Inverse of :func:`to_hex`.
    """
    if len(text) != 10:
        raise HexDigestError(
            f"digest must be exactly 10 hex characters, got {len(text)}"
        )
    if not all(c in _HEXDIGITS for c in text):
        raise HexDigestError(f"digest contains non-hex characters: {text!r}")
    raw = int(text, 16)
    if raw & 0xF:
        raise HexDigestError(
            "trailing nibble must be zero (36 significant bits in 40)"
        )
    return Digest36(raw >> 4)


def indices(digest: int) -> IndexPair:
    """Slice a digest into its two filter indices.

    ``hi`` is the most significant 18 bits, ``lo`` the least; the two
    may coincide.
    """
    value = int(digest)
    return IndexPair(hi=(value >> INDEX_BITS) & _INDEX_MASK, lo=value & _INDEX_MASK)
