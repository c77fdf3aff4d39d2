"""The ABOM container format.

Layout (all multi-byte fields little-endian):

====== ====== ===========================================
offset size   field
====== ====== ===========================================
0      4      magic word ``ABOM``
4      1      protocol version, currently 1
5      2      filter count ``a``
7      4      arithmetic model ``p1_q`` (p(1) * (2**32-1))
11     4      payload byte length
15     ...    arithmetically coded concatenated bit arrays
====== ====== ===========================================

Filter geometry is fixed system-wide, so neither ``m`` nor ``k`` is
encoded. The payload holds the filters' bit arrays concatenated in
creation order and coded under the single header model. Parsing is
strict: the declared payload length must cover the remaining bytes
exactly.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .bloom import FILTER_BITS, FILTER_BYTES, MAX_FILTERS, BloomFilter, FilterChain
from .coder import ArithModel, decode, encode, model_from_bits
from .errors import (
    CapacityError,
    MalformedError,
    NotAnAbomError,
    TruncatedError,
    UnsupportedVersionError,
)

MAGIC = b"ABOM"
VERSION = 1
_HEADER = struct.Struct("<4sBHII")
HEADER_LEN = _HEADER.size
assert HEADER_LEN == 15


@dataclass
class AbomDocument:
    """A filter chain plus its protocol metadata."""

    chain: FilterChain = field(default_factory=FilterChain)
    version: int = VERSION

    def __contains__(self, digest: int) -> bool:
        return digest in self.chain

    contains = __contains__


def serialize(doc: AbomDocument) -> bytes:
    """Render a document into container bytes.

    The model is computed over the concatenation of all filter bit
    arrays, so the header's quantized probability always matches the
    payload it precedes.
    """
    count = len(doc.chain)
    if count > MAX_FILTERS:
        raise CapacityError(f"{count} filters exceed the 16-bit count field")
    packed = (
        doc.chain.filters[0].bits
        if count == 1
        else np.concatenate([f.bits for f in doc.chain])
    )
    total_bits = count * FILTER_BITS
    model = model_from_bits(packed, total_bits)
    payload = encode(packed, total_bits, model)
    if len(payload) > 0xFFFFFFFF:
        raise CapacityError("payload exceeds the 32-bit length field")
    header = _HEADER.pack(MAGIC, doc.version, count, model.p1_q, len(payload))
    return header + payload


def _read_header(data: bytes) -> tuple[int, int, int]:
    """Validate the fixed header; returns (count, p1_q, payload length)."""
    if data[:4] != MAGIC:
        raise NotAnAbomError("magic word 'ABOM' not found")
    if len(data) < HEADER_LEN:
        raise TruncatedError("input shorter than the 15-byte header")
    _, version, count, p1_q, payload_len = _HEADER.unpack_from(data, 0)
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported protocol version {version}")
    if count == 0:
        raise MalformedError("filter count must be at least 1")
    if not 1 <= p1_q <= 0xFFFFFFFE:
        raise MalformedError(f"model probability out of range: {p1_q}")
    return count, p1_q, payload_len


def check_header(data: bytes) -> None:
    """Raise a wire error unless ``data`` is a plausible container.

    Validates every header field and the payload length without paying
    for a payload decode.
    """
    _, _, payload_len = _read_header(data)
    if len(data) - HEADER_LEN != payload_len:
        raise TruncatedError(
            f"declared payload of {payload_len} bytes, "
            f"found {len(data) - HEADER_LEN}"
        )


def parse(data: bytes) -> AbomDocument:
    """Parse container bytes back into a document.

    Every failure raises a typed error; no input can trigger a crash or
    an allocation beyond what the declared filter count implies.
    """
    count, p1_q, payload_len = _read_header(data)
    payload = data[HEADER_LEN:]
    if len(payload) != payload_len:
        raise TruncatedError(
            f"declared payload of {payload_len} bytes, found {len(payload)}"
        )
    bits = decode(payload, ArithModel(p1_q), count * FILTER_BITS)
    filters = [
        BloomFilter(bits[i * FILTER_BYTES : (i + 1) * FILTER_BYTES].copy())
        for i in range(count)
    ]
    return AbomDocument(chain=FilterChain(filters))
