"""Fixed-parameter Bloom filters and their overflow chains.

Every filter in the system shares a single geometry: 2**18 bits
addressed by the two 18-bit slices of a digest. Rather than resizing, a
chain appends a fresh filter once the occupancy estimate of the last
one would pass 1028 items, which keeps the per-filter false-positive
rate under 2**-14. Chains support insertion, membership queries, and
unions; none of these can introduce a false negative.

Bit arrays are kept packed, 8 bits per byte, most significant bit
first (the ``numpy.packbits`` convention): bit ``i`` lives in byte
``i >> 3`` under mask ``0x80 >> (i & 7)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from .digest import indices
from .errors import CapacityError

FILTER_BITS = 1 << 18          # bit-array length m
FILTER_BYTES = FILTER_BITS // 8
HASH_SLICES = 2                # index slices per digest, k
MAX_ITEMS = 1028               # saturation threshold on the occupancy estimate
MAX_FPR = 2.0 ** -14           # per-filter false-positive bound at MAX_ITEMS
MAX_FILTERS = 0xFFFF           # 16-bit filter-count field in the wire format

# Set-bit count for every byte value, for popcounts over packed arrays.
_POPCOUNT = np.unpackbits(
    np.arange(256, dtype=np.uint8)[:, None], axis=1
).sum(axis=1).astype(np.int64)


@dataclass(frozen=True)
class FilterParams:
    """The one parameter point shared by every filter."""

    m: int = FILTER_BITS
    k: int = HASH_SLICES
    n_max: int = MAX_ITEMS
    f_max: float = MAX_FPR


PARAMS = FilterParams()


def popcount(packed: np.ndarray) -> int:
    """Number of set bits in a packed bit array."""
    return int(_POPCOUNT[packed].sum())


def estimate_items(ones: int) -> float:
    """Expected insertion count given ``ones`` set bits.

    Evaluates -(m/k) * ln(1 - ones/m); a completely full array maps to
    positive infinity.
    """
    if ones >= FILTER_BITS:
        return math.inf
    return -(FILTER_BITS / HASH_SLICES) * math.log1p(-ones / FILTER_BITS)


class BloomFilter:
    """One 2**18-bit filter with a cached count of set bits."""

    __slots__ = ("bits", "ones")

    def __init__(self, bits: Optional[np.ndarray] = None):
        if bits is None:
            self.bits = np.zeros(FILTER_BYTES, dtype=np.uint8)
            self.ones = 0
        else:
            bits = np.ascontiguousarray(bits, dtype=np.uint8)
            if bits.shape != (FILTER_BYTES,):
                raise ValueError(
                    f"filter bit array must be {FILTER_BYTES} packed bytes"
                )
            self.bits = bits
            self.ones = popcount(bits)

    def copy(self) -> "BloomFilter":
        dup = BloomFilter.__new__(BloomFilter)
        dup.bits = self.bits.copy()
        dup.ones = self.ones
        return dup

    def insert(self, digest: int) -> int:
        """Set the digest's two index bits; returns how many went 0 -> 1."""
        newly = 0
        for idx in indices(digest):
            byte, mask = idx >> 3, 0x80 >> (idx & 7)
            if not self.bits[byte] & mask:
                self.bits[byte] |= mask
                newly += 1
        self.ones += newly
        return newly

    def would_add(self, digest: int) -> int:
        """Bits :meth:`insert` would newly set, without mutating."""
        pair = indices(digest)
        slots = (pair.hi,) if pair.hi == pair.lo else pair
        return sum(
            1 for idx in slots if not self.bits[idx >> 3] & (0x80 >> (idx & 7))
        )

    def __contains__(self, digest: int) -> bool:
        hi, lo = indices(digest)
        return bool(
            self.bits[hi >> 3] & (0x80 >> (hi & 7))
            and self.bits[lo >> 3] & (0x80 >> (lo & 7))
        )

    contains = __contains__

    def __or__(self, other: "BloomFilter") -> "BloomFilter":
        """Bitwise union; membership is the or of both memberships."""
        return BloomFilter(np.bitwise_or(self.bits, other.bits))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BloomFilter):
            return NotImplemented
        return bool(np.array_equal(self.bits, other.bits))

    __hash__ = None  # mutable

    def estimate_n(self) -> float:
        """Occupancy estimate for this filter (see :func:`estimate_items`)."""
        return estimate_items(self.ones)

    def __repr__(self) -> str:
        return f"<BloomFilter ones={self.ones}>"


def union_filters(a: BloomFilter, b: BloomFilter) -> BloomFilter:
    """Bit-level union of two filters."""
    return a | b


class FilterChain:
    """Ordered, non-empty sequence of filters queried as one set.

    A chain always holds at least one filter and at most 65535 (the
    wire format's count field). With no argument the chain starts as a
    single empty filter.
    """

    __slots__ = ("filters",)

    def __init__(self, filters: Optional[Sequence[BloomFilter]] = None):
        items = list(filters) if filters is not None else [BloomFilter()]
        if not items:
            raise CapacityError("a filter chain must hold at least one filter")
        if len(items) > MAX_FILTERS:
            raise CapacityError(
                f"chain of {len(items)} filters exceeds the {MAX_FILTERS} limit"
            )
        self.filters = items

    def __len__(self) -> int:
        return len(self.filters)

    def __iter__(self) -> Iterator[BloomFilter]:
        return iter(self.filters)

    def __contains__(self, digest: int) -> bool:
        return any(digest in f for f in self.filters)

    contains = __contains__

    def insert(self, digest: int) -> None:
        """Insert a digest, appending a fresh filter on overflow.

        A digest already present anywhere in the chain is skipped, so
        one value never occupies bits in two filters. Otherwise the
        last filter takes the insertion unless its occupancy estimate
        would pass the saturation threshold, in which case a new filter
        is appended and receives it.
        """
        if digest in self:
            return
        last = self.filters[-1]
        hypothetical = last.ones + last.would_add(digest)
        if estimate_items(hypothetical) <= MAX_ITEMS:
            last.insert(digest)
            return
        if len(self.filters) >= MAX_FILTERS:
            raise CapacityError("filter chain is at its 65535-filter capacity")
        fresh = BloomFilter()
        fresh.insert(digest)
        self.filters.append(fresh)

    def union(self, other: "FilterChain") -> "FilterChain":
        """Merge another chain into a copy of this one.

        Each incoming filter is OR-ed into the first existing filter
        whose occupancy estimate stays within the saturation threshold
        (first fit in creation order); if none fits it is appended
        unchanged. The result answers true for every digest queryable
        in either input.
        """
        merged = [f.copy() for f in self.filters]
        for incoming in other.filters:
            for target in merged:
                combined = np.bitwise_or(target.bits, incoming.bits)
                ones = popcount(combined)
                if estimate_items(ones) <= MAX_ITEMS:
                    target.bits = combined
                    target.ones = ones
                    break
            else:
                if len(merged) >= MAX_FILTERS:
                    raise CapacityError(
                        "union would exceed the 65535-filter capacity"
                    )
                merged.append(incoming.copy())
        return FilterChain(merged)

    def __repr__(self) -> str:
        return f"<FilterChain filters={len(self.filters)}>"
