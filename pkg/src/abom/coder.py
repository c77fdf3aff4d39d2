"""Static-model binary arithmetic coder for filter bit arrays.

The model is a single quantized probability: p(1) = p1_q / (2**32 - 1),
carried verbatim in the container header, so encoder and decoder always
agree after the lossy quantization step.

Coder construction, which both ends must follow bit-for-bit:

* state is a 32-bit window of ``low`` (held wider so carries are
  visible) and a 32-bit ``range`` starting at 2**32 - 1;
* per input bit, ``split = clamp(range * (2**32 - 1 - p1_q)
  // (2**32 - 1), 1, range - 1)`` using a 64-bit intermediate product;
  a 0 bit takes the lower subrange (``range = split``), a 1 bit the
  upper (``low += split; range -= split``);
* a carry out of the 32-bit window propagates into bytes already
  emitted;
* whenever ``range`` drops below 2**24 the top byte of the window is
  emitted and both values shift left by one byte;
* the final flush emits the four window bytes plus one zero sentinel
  byte. The decoder consumes everything except that sentinel, which is
  how truncated payloads are told apart from complete ones.

Bit sequences are passed packed, 8 bits per byte, most significant bit
first (the ``numpy.packbits`` convention), together with an explicit
bit count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import CorruptPayloadError

_SCALE = (1 << 32) - 1      # probability denominator, also the initial range
_FLUSH_BYTES = 5


@dataclass(frozen=True)
class ArithModel:
    """Quantized probability that a bit is 1."""

    p1_q: int

    def __post_init__(self):
        if not 1 <= self.p1_q <= _SCALE - 1:
            raise ValueError(f"p1_q outside [1, 2**32 - 2]: {self.p1_q}")

    @property
    def p1(self) -> float:
        return self.p1_q / _SCALE


def count_ones(packed: np.ndarray, bit_len: int) -> int:
    """Set bits among the first ``bit_len`` bits of a packed array."""
    return int(np.unpackbits(packed, count=bit_len).sum())


def model_from_bits(packed: np.ndarray, bit_len: int) -> ArithModel:
    """Build the model matching a bit sequence's density of ones.

    The ones ratio is scaled by 2**32 - 1 and rounded half-up, then
    clamped into [1, 2**32 - 2] so both symbols stay codable even for
    all-zero or all-one input. The clamped value is authoritative for
    both encoding and decoding.
    """
    if bit_len < 1:
        raise ValueError("cannot model an empty bit sequence")
    packed = np.ascontiguousarray(packed, dtype=np.uint8)
    ones = count_ones(packed, bit_len)
    quantized = (2 * ones * _SCALE + bit_len) // (2 * bit_len)  # round half up
    return ArithModel(min(max(quantized, 1), _SCALE - 1))


@njit(cache=True)
def _encode_kernel(packed, nbits, p1q, out):  # pragma: no cover - jitted
    mask = np.uint64(0xFFFFFFFF)
    top = np.uint64(1 << 24)
    one = np.uint64(1)
    eight = np.uint64(8)
    twentyfour = np.uint64(24)
    p0q = mask - p1q
    low = np.uint64(0)
    rng = mask
    pos = 0
    cap = out.size
    for i in range(nbits):
        bit = (packed[i >> 3] >> (7 - (i & 7))) & 1
        split = (rng * p0q) // mask
        if split < one:
            split = one
        elif split > rng - one:
            split = rng - one
        if bit:
            low += split
            rng -= split
            if low > mask:
                # carry: bump the most recent non-0xFF emitted byte
                j = pos - 1
                while j >= 0 and out[j] == 0xFF:
                    out[j] = 0
                    j -= 1
                if j >= 0:
                    out[j] += 1
                low &= mask
        else:
            rng = split
        while rng < top:
            if pos >= cap:
                return -1
            out[pos] = np.uint8(low >> twentyfour)
            pos += 1
            low = (low << eight) & mask
            rng = rng << eight
    for _ in range(_FLUSH_BYTES):
        if pos >= cap:
            return -1
        out[pos] = np.uint8(low >> twentyfour)
        pos += 1
        low = (low << eight) & mask
    return pos


@njit(cache=True)
def _decode_kernel(data, p1q, nbits, out):  # pragma: no cover - jitted
    mask = np.uint64(0xFFFFFFFF)
    top = np.uint64(1 << 24)
    one = np.uint64(1)
    eight = np.uint64(8)
    avail = data.size
    if avail < 4:
        return -1
    p0q = mask - p1q
    code = (
        (np.uint64(data[0]) << np.uint64(24))
        | (np.uint64(data[1]) << np.uint64(16))
        | (np.uint64(data[2]) << eight)
        | np.uint64(data[3])
    )
    rng = mask
    pos = 4
    for i in range(nbits):
        split = (rng * p0q) // mask
        if split < one:
            split = one
        elif split > rng - one:
            split = rng - one
        if code < split:
            rng = split
        else:
            code -= split
            rng -= split
            out[i >> 3] |= np.uint8(128 >> (i & 7))
        while rng < top:
            if pos >= avail:
                return -1
            code = ((code << eight) | np.uint64(data[pos])) & mask
            pos += 1
            rng = rng << eight
    return pos


def encode(packed: np.ndarray, bit_len: int, model: ArithModel) -> bytes:
    """Encode the first ``bit_len`` bits of a packed array.

    Deterministic for a given (bits, model) pair; any valid model
    round-trips, a mismatched one only costs output size.
    """
    if bit_len < 1:
        raise ValueError("cannot encode an empty bit sequence")
    packed = np.ascontiguousarray(packed, dtype=np.uint8)
    if packed.size < (bit_len + 7) // 8:
        raise ValueError("packed array shorter than the declared bit count")
    # Matched models land near bit_len/8; retry covers mismatched ones up
    # to the true worst case of 3 output bytes per input bit.
    size = bit_len // 8 + 4096
    worst = 3 * bit_len + _FLUSH_BYTES
    while True:
        out = np.empty(min(size, worst), dtype=np.uint8)
        written = _encode_kernel(packed, bit_len, np.uint64(model.p1_q), out)
        if written >= 0:
            return out[:written].tobytes()
        if size >= worst:
            raise AssertionError("encoder exceeded its worst-case bound")
        size *= 4


def decode(data: bytes, model: ArithModel, bit_len: int) -> np.ndarray:
    """Decode ``bit_len`` bits from an :func:`encode` payload.

    Returns a freshly packed array. Raises
    :class:`~abom.errors.CorruptPayloadError` when the payload runs out
    early or does not end exactly at the sentinel byte.
    """
    if bit_len < 1:
        raise ValueError("bit count to decode must be positive")
    buf = np.frombuffer(data, dtype=np.uint8)
    out = np.zeros((bit_len + 7) // 8, dtype=np.uint8)
    consumed = _decode_kernel(buf, np.uint64(model.p1_q), bit_len, out)
    if consumed < 0:
        raise CorruptPayloadError(
            f"payload exhausted before {bit_len} bits were decoded"
        )
    if consumed + 1 != buf.size:
        raise CorruptPayloadError(
            "payload length does not match its decoded content"
        )
    return out
