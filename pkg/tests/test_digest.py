import pytest
from hypothesis import given, strategies as st

from abom.digest import Digest36, from_hex, hash_bytes, hash_file, indices, to_hex
from abom.errors import HexDigestError

# Frozen reference vectors: first 36 bits of the SHAKE128 output stream,
# computed with an independent SHAKE128 implementation.
EMPTY_DIGEST = 0x7F9C2BA4E  # XOF prefix 7f 9c 2b a4 e8
ABC_DIGEST = 0x5881092DD    # XOF prefix 58 81 09 2d d8

digest_values = st.integers(min_value=0, max_value=(1 << 36) - 1)


class TestHashBytes:
    def test_empty_input(self):
        assert hash_bytes(b"") == EMPTY_DIGEST

    def test_abc(self):
        assert hash_bytes(b"abc") == ABC_DIGEST

    def test_deterministic(self):
        assert hash_bytes(b"content") == hash_bytes(b"content")

    def test_distinct_inputs_differ(self):
        assert hash_bytes(b"a") != hash_bytes(b"b")

    @given(st.binary(max_size=256))
    def test_range(self, data):
        assert 0 <= hash_bytes(data) < 1 << 36


class TestHashFile:
    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty"
        path.write_bytes(b"")
        assert hash_file(path) == EMPTY_DIGEST

    def test_matches_hash_bytes(self, tmp_path):
        path = tmp_path / "f"
        path.write_bytes(b"abc")
        assert hash_file(path) == hash_bytes(b"abc")

    def test_large_file_streams(self, tmp_path):
        content = bytes(range(256)) * 4096  # 1 MiB, spans many chunks
        path = tmp_path / "big"
        path.write_bytes(content)
        assert hash_file(path) == hash_bytes(content)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError) as exc_info:
            hash_file(tmp_path / "nope")
        assert "nope" in str(exc_info.value)

    def test_identical_content_identical_digest(self, tmp_path):
        one, two = tmp_path / "one.c", tmp_path / "two.c"
        one.write_bytes(b"int x;\n")
        two.write_bytes(b"int x;\n")
        assert hash_file(one) == hash_file(two)


class TestHexRendering:
    def test_paper_literal(self):
        assert to_hex(Digest36(0x7F9C2BA4E)) == "7f9c2ba4e0"

    def test_zero(self):
        assert to_hex(Digest36(0)) == "0000000000"

    def test_max(self):
        assert to_hex(Digest36((1 << 36) - 1)) == "fffffffff0"

    def test_parse_paper_literal(self):
        assert from_hex("7f9c2ba4e0") == 0x7F9C2BA4E

    def test_parse_case_insensitive(self):
        assert from_hex("7F9C2BA4E0") == 0x7F9C2BA4E

    @pytest.mark.parametrize(
        "bad",
        ["7f9c2ba4e", "7f9c2ba4e00", "", "7f9c2ba4e1", "7f9c2ba4zz", "0x12345670"],
    )
    def test_parse_rejects(self, bad):
        with pytest.raises(HexDigestError):
            from_hex(bad)

    @given(digest_values)
    def test_roundtrip(self, value):
        digest = Digest36(value)
        assert from_hex(to_hex(digest)) == digest


class TestIndices:
    def test_zero(self):
        assert indices(Digest36(0)) == (0, 0)

    def test_all_ones(self):
        pair = indices(Digest36((1 << 36) - 1))
        assert pair == ((1 << 18) - 1, (1 << 18) - 1)

    def test_known_value(self):
        # independently derived by slicing the 36-bit binary string
        pair = indices(Digest36(0x7F9C2BA4E))
        assert pair == (0x1FE70, 0x2BA4E)

    @given(digest_values)
    def test_matches_bit_string_slices(self, value):
        bits = format(value, "036b")
        pair = indices(Digest36(value))
        assert pair == (int(bits[:18], 2), int(bits[18:], 2))

    @given(digest_values)
    def test_recombines(self, value):
        pair = indices(Digest36(value))
        assert pair.hi < 1 << 18 and pair.lo < 1 << 18
        assert (pair.hi << 18) | pair.lo == value


class TestDigest36:
    def test_rejects_too_large(self):
        with pytest.raises(ValueError):
            Digest36(1 << 36)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            Digest36(-1)

    def test_ordering_is_value_ordering(self):
        assert Digest36(1) < Digest36(2) and Digest36(2) == 2
