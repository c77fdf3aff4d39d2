import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abom.coder import ArithModel, count_ones, decode, encode, model_from_bits
from abom.errors import CorruptPayloadError
from conftest import distinct_digests

SCALE = (1 << 32) - 1
FILTER_BITS = 1 << 18


def pack(bits01: np.ndarray) -> np.ndarray:
    return np.packbits(np.asarray(bits01, dtype=np.uint8))


def unpack(packed: np.ndarray, n: int) -> np.ndarray:
    return np.unpackbits(packed, count=n)


class TestModel:
    def test_all_zero_clamps_low(self):
        assert model_from_bits(np.zeros(32, np.uint8), 256).p1_q == 1

    def test_all_one_clamps_high(self):
        assert model_from_bits(np.full(32, 0xFF, np.uint8), 256).p1_q == SCALE - 1

    def test_quantization(self):
        # 2048 ones in 2**18 bits: exact big-integer round-half-up of
        # (2048/2**18) * (2**32-1) = 33554431.9921875
        packed = np.zeros(FILTER_BITS // 8, np.uint8)
        packed[:256] = 0xFF
        assert model_from_bits(packed, FILTER_BITS).p1_q == 33554432

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            model_from_bits(np.zeros(1, np.uint8), 0)

    @pytest.mark.parametrize("bad", [0, SCALE, SCALE + 1, -1])
    def test_model_range_enforced(self, bad):
        with pytest.raises(ValueError):
            ArithModel(bad)

    def test_count_ones_masks_padding(self):
        packed = np.array([0xFF], np.uint8)
        assert count_ones(packed, 3) == 3


class TestEncode:
    def test_all_zero_filter_is_tiny(self):
        bits = np.zeros(FILTER_BITS // 8, np.uint8)
        out = encode(bits, FILTER_BITS, ArithModel(1))
        assert out == b"\x00" * 5
        assert len(out) < 64

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        packed = rng.integers(0, 256, 512).astype(np.uint8)
        model = model_from_bits(packed, 4096)
        assert encode(packed, 4096, model) == encode(packed, 4096, model)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            encode(np.zeros(1, np.uint8), 0, ArithModel(1))

    def test_short_buffer_rejected(self):
        with pytest.raises(ValueError):
            encode(np.zeros(1, np.uint8), 64, ArithModel(1))

    def test_saturated_filter_near_entropy(self):
        from abom.bloom import BloomFilter

        rng = np.random.default_rng(42)
        filt = BloomFilter()
        for digest in distinct_digests(rng, 1028):
            filt.insert(digest)
        model = model_from_bits(filt.bits, FILTER_BITS)
        out = encode(filt.bits, FILTER_BITS, model)
        # ideal-compressor prediction at this occupancy is ~2160 bytes
        assert 2100 <= len(out) <= 2268
        assert len(out) <= 1.05 * 2160

    @pytest.mark.parametrize("density", [0.001, 0.01, 0.1, 0.5])
    def test_within_entropy_bound(self, density):
        rng = np.random.default_rng(int(density * 1e4))
        n = 1 << 17
        raw = (rng.random(n) < density).astype(np.uint8)
        packed = pack(raw)
        model = model_from_bits(packed, n)
        out = encode(packed, n, model)
        p = raw.sum() / n
        entropy_bits = n * (-p * math.log2(p) - (1 - p) * math.log2(1 - p))
        assert len(out) <= entropy_bits / 8 * 1.02 + 16


class TestRoundtrip:
    def test_seeded_sweep(self):
        # includes both clamp extremes and random mismatched models
        rng = np.random.default_rng(99)
        for trial in range(1000):
            n = int(rng.integers(1, 2049))
            raw = (rng.random(n) < rng.random()).astype(np.uint8)
            packed = pack(raw)
            if trial % 3 == 0:
                p1_q = 1 if trial % 6 == 0 else SCALE - 1
            else:
                p1_q = int(rng.integers(1, SCALE - 1))
            model = ArithModel(p1_q)
            out = decode(encode(packed, n, model), model, n)
            assert np.array_equal(unpack(out, n), raw), (trial, n, p1_q)

    @settings(max_examples=120, deadline=None)
    @given(st.binary(min_size=1, max_size=256), st.integers(1, SCALE - 1))
    def test_property(self, data, p1_q):
        packed = np.frombuffer(data, np.uint8)
        n = len(data) * 8
        model = ArithModel(p1_q)
        out = decode(encode(packed, n, model), model, n)
        assert np.array_equal(out, packed)

    def test_mismatched_model_roundtrips(self):
        bits = np.full(64, 0xFF, np.uint8)  # all ones, model says all zeros
        model = ArithModel(1)
        out = decode(encode(bits, 512, model), model, 512)
        assert np.array_equal(out, bits)

    def test_full_filter_roundtrip(self):
        rng = np.random.default_rng(17)
        packed = rng.integers(0, 256, FILTER_BITS // 8).astype(np.uint8)
        model = model_from_bits(packed, FILTER_BITS)
        out = decode(encode(packed, FILTER_BITS, model), model, FILTER_BITS)
        assert np.array_equal(out, packed)


class TestDecodeErrors:
    def _sample(self):
        rng = np.random.default_rng(1)
        packed = rng.integers(0, 256, 128).astype(np.uint8)
        model = model_from_bits(packed, 1024)
        return encode(packed, 1024, model), model

    def test_truncated_by_one_byte(self):
        payload, model = self._sample()
        with pytest.raises(CorruptPayloadError):
            decode(payload[:-1], model, 1024)

    def test_truncated_to_half(self):
        payload, model = self._sample()
        with pytest.raises(CorruptPayloadError):
            decode(payload[: len(payload) // 2], model, 1024)

    def test_too_short_to_prime(self):
        _, model = self._sample()
        with pytest.raises(CorruptPayloadError):
            decode(b"\x00\x00", model, 8)

    def test_trailing_garbage(self):
        payload, model = self._sample()
        with pytest.raises(CorruptPayloadError):
            decode(payload + b"\x00", model, 1024)

    def test_zero_bits_rejected(self):
        with pytest.raises(ValueError):
            decode(b"\x00" * 5, ArithModel(1), 0)
