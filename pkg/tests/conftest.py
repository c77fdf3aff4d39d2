from pathlib import Path

import numpy as np
import pytest

from abom.bloom import FILTER_BYTES, BloomFilter, FilterChain
from abom.wire import AbomDocument, serialize

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def reloc_bytes() -> bytes:
    return (FIXTURES / "fixture_reloc.o").read_bytes()


@pytest.fixture(scope="session")
def exec_bytes() -> bytes:
    return (FIXTURES / "fixture_exec").read_bytes()


@pytest.fixture(scope="session", autouse=True)
def _warm_coder():
    # trigger the JIT once so no individual test pays compile time
    from abom.coder import decode, encode, model_from_bits

    bits = np.zeros(1, np.uint8)
    model = model_from_bits(bits, 8)
    decode(encode(bits, 8, model), model, 8)


def distinct_digests(rng: np.random.Generator, count: int) -> list[int]:
    """Uniform random 36-bit values, all distinct, in random order."""
    vals = rng.integers(0, 1 << 36, size=count * 2 + 16, dtype=np.uint64)
    vals = np.unique(vals)
    assert len(vals) >= count
    rng.shuffle(vals)
    return [int(v) for v in vals[:count]]


def filter_with_ones(count: int, start: int = 0) -> BloomFilter:
    """A filter with ``count`` consecutive bits set from byte-aligned ``start``."""
    assert start % 8 == 0
    packed = np.zeros(FILTER_BYTES, dtype=np.uint8)
    full, rem = divmod(count, 8)
    first = start // 8
    packed[first : first + full] = 0xFF
    if rem:
        packed[first + full] = (0xFF << (8 - rem)) & 0xFF
    return BloomFilter(packed)


def saturated_filter(rng: np.random.Generator) -> BloomFilter:
    """A filter loaded with 1028 distinct random digests."""
    filt = BloomFilter()
    for digest in distinct_digests(rng, 1028):
        filt.insert(digest)
    return filt


def document_blob(*digests: int) -> bytes:
    """Serialized single-chain document holding the given digests."""
    chain = FilterChain()
    for digest in digests:
        chain.insert(digest)
    return serialize(AbomDocument(chain=chain))
