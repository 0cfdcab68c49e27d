"""Tests for keccak-256, RLP, and the integer/hex conventions."""

import pytest
from hypothesis import given, settings, strategies as st

from dappbench import codec
from dappbench.codec import (
    NonCanonical,
    PayloadTooLarge,
    TrailingBytes,
    TruncatedInput,
    from_hex,
    int_from_minimal_be,
    int_to_minimal_be,
    keccak256,
    rlp_decode,
    rlp_encode,
    to_hex,
)

from oracles import ref_keccak256, ref_rlp_encode


def _pattern(n: int) -> bytes:
    return bytes((i * 7 + 3) % 256 for i in range(n))


# Digests of _pattern(n), computed with the independent reference
# implementation in oracles.py and frozen here. The lengths straddle the
# 136-byte sponge rate at one and two blocks.
KECCAK_VECTORS = [
    (0, "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470"),
    (1, "69c322e3248a5dfc29d73c5b0553b0185a35cd5bb6386747517ef7e53b15e287"),
    (2, "3b8194e0262a1713bd119866e92437201534cd3894e1b8ac6695c3735cbda009"),
    (55, "152cc5298108a3ec3a26e0c5aead9c2770c184a6bdf87eb087716b185c8e2238"),
    (56, "515efa1a7d43f655443dff20ec3f7e75e2af9ec2415ca813d21d0918a0e70fa2"),
    (134, "0c00ddc2482876f8fa8cc91ed55deedf61049892967f383560faf8a5787f86c5"),
    (135, "00ef96af9cf4b24c7f269d922294444a197d0a33638c2e56634c57e892103a8f"),
    (136, "742061bcad767ed4c4f5883b1dcb1aad11afdcc140dc469d953759b127b9f9ed"),
    (137, "e3371f61e770abf254c34239c3b0099ad90594507415bc81dd0a10b9692bbf2a"),
    (200, "66d2cdf3ab4c5bd3c75add9b60b14ac5b7789534fa2da3f348853b847359a3a0"),
    (272, "ac141fd7b0a0ffcd2e967254d508da3ec616596493c36fa304425647d90e6de5"),
    (273, "16192ea86793083e47731cb3c970600f04768414d92bc0540e54ce8607a0fce0"),
]

# Well-known public digests, asserted against both implementations.
KNOWN_DIGESTS = [
    (b"", "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470"),
    (b"abc", "4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45"),
    # keccak(rlp("")) and keccak(rlp([])): the empty trie root and the
    # empty ommers hash.
    (b"\x80", "56e81f171bcc55a6ff8345e692c0f86e5b48e01b996cadc001622fb5e363b421"),
    (b"\xc0", "1dcc4de8dec75d7aab85b567b6ccd41ad312451b948a7413f0a142fd40d49347"),
]


class TestKeccak:
    @pytest.mark.parametrize("length,digest", KECCAK_VECTORS)
    def test_frozen_vectors(self, length, digest):
        assert keccak256(_pattern(length)).hex() == digest

    @pytest.mark.parametrize("length,digest", KECCAK_VECTORS)
    def test_oracle_agrees_with_frozen_vectors(self, length, digest):
        assert ref_keccak256(_pattern(length)).hex() == digest

    @pytest.mark.parametrize("data,digest", KNOWN_DIGESTS)
    def test_known_public_digests(self, data, digest):
        assert keccak256(data).hex() == digest
        assert ref_keccak256(data).hex() == digest

    def test_deterministic(self):
        assert keccak256(b"same input") == keccak256(b"same input")

    def test_output_length_is_32(self):
        assert len(keccak256(_pattern(200))) == 32

    @given(st.binary(max_size=512))
    @settings(max_examples=60, deadline=None)
    def test_matches_reference_on_random_inputs(self, data):
        assert keccak256(data) == ref_keccak256(data)


class TestMinimalBigEndian:
    def test_zero_is_empty(self):
        assert int_to_minimal_be(0) == b""
        assert int_from_minimal_be(b"") == 0

    def test_hand_computed(self):
        assert int_to_minimal_be(1024) == b"\x04\x00"
        assert int_to_minimal_be(127) == b"\x7f"

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            int_to_minimal_be(-1)

    def test_leading_zero_rejected(self):
        with pytest.raises(NonCanonical):
            int_from_minimal_be(b"\x00\x01")

    @given(st.integers(min_value=0, max_value=2**256 - 1))
    @settings(max_examples=200, deadline=None)
    def test_round_trip(self, n):
        assert int_from_minimal_be(int_to_minimal_be(n)) == n


class TestHex:
    def test_lowercase_prefixed_output(self):
        assert to_hex(b"\xab\xcd") == "0xabcd"

    def test_accepts_mixed_case_and_missing_prefix(self):
        assert from_hex("0xAbCd") == b"\xab\xcd"
        assert from_hex("abcd") == b"\xab\xcd"

    def test_rejects_garbage(self):
        with pytest.raises(ValueError):
            from_hex("0xzz")


rlp_items = st.recursive(
    st.binary(max_size=1024),
    lambda children: st.lists(children, max_size=6),
    max_leaves=12,
)


class TestRlp:
    def test_empty_string(self):
        assert rlp_encode(b"") == b"\x80"
        assert rlp_decode(b"\x80") == b""

    def test_empty_list(self):
        assert rlp_encode([]) == b"\xc0"
        assert rlp_decode(b"\xc0") == []

    def test_dog(self):
        assert rlp_encode(b"dog") == bytes.fromhex("83646f67")

    def test_cat_dog_list(self):
        assert rlp_encode([b"cat", b"dog"]) == bytes.fromhex("c88363617483646f67")
        assert rlp_decode(bytes.fromhex("c88363617483646f67")) == [b"cat", b"dog"]

    def test_single_byte_self_encodes(self):
        assert rlp_encode(b"\x00") == b"\x00"
        assert rlp_encode(b"\x7f") == b"\x7f"

    def test_long_string(self):
        data = b"x" * 56
        encoded = rlp_encode(data)
        assert encoded[:2] == b"\xb8\x38"
        assert rlp_decode(encoded) == data

    def test_nested_lists(self):
        item = [[], [[]], [b"a", [b"b"]]]
        assert rlp_decode(rlp_encode(item)) == item

    def test_wrapped_single_byte_rejected(self):
        with pytest.raises(NonCanonical):
            rlp_decode(b"\x81\x00")

    def test_long_form_for_short_payload_rejected(self):
        with pytest.raises(NonCanonical):
            rlp_decode(b"\xb8\x01\x61")  # "a" must use the short form

    def test_length_of_length_leading_zero_rejected(self):
        payload = b"y" * 56
        with pytest.raises(NonCanonical):
            rlp_decode(b"\xb9\x00\x38" + payload)

    def test_trailing_bytes_rejected(self):
        with pytest.raises(TrailingBytes):
            rlp_decode(b"\x80\x80")

    def test_truncated_rejected(self):
        with pytest.raises(TruncatedInput):
            rlp_decode(b"\x83do")
        with pytest.raises(TruncatedInput):
            rlp_decode(b"")

    def test_declared_length_above_cap_rejected(self):
        huge = (codec.MAX_RLP_PAYLOAD + 1).to_bytes(4, "big")
        with pytest.raises(PayloadTooLarge):
            rlp_decode(b"\xbb" + huge)

    def test_oversized_encode_rejected(self):
        with pytest.raises(PayloadTooLarge):
            codec._length_prefix(codec.MAX_RLP_PAYLOAD + 1, 0x80)

    def test_non_encodable_type_rejected(self):
        with pytest.raises(TypeError):
            rlp_encode(42)

    @given(rlp_items)
    @settings(max_examples=300, deadline=None)
    def test_round_trip(self, item):
        assert rlp_decode(rlp_encode(item)) == item

    @given(rlp_items)
    @settings(max_examples=100, deadline=None)
    def test_matches_reference_encoder(self, item):
        assert rlp_encode(item) == ref_rlp_encode(item)

    @given(rlp_items, st.data())
    @settings(max_examples=100, deadline=None)
    def test_strict_prefixes_fail(self, item, data):
        encoded = rlp_encode(item)
        cut = data.draw(st.integers(min_value=0, max_value=len(encoded) - 1))
        with pytest.raises(TruncatedInput):
            rlp_decode(encoded[:cut])
