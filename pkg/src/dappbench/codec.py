"""Byte-level primitives: keccak-256, RLP, and integer/hex conventions.

Everything in here is pure and deterministic; the rest of the workbench
builds its wire formats (transactions, contract addresses, call data,
snapshot checksums) on top of these functions.
"""

from __future__ import annotations

from typing import Union

RlpItem = Union[bytes, list]
"""An RLP item: a byte string or a (possibly nested) list of items."""

# Refuse to encode or decode payloads above this size; the service accepts
# uploaded artifacts and must not be memory-bombed by a forged length prefix.
MAX_RLP_PAYLOAD = 16 * 1024 * 1024


class RlpError(ValueError):
    """Base class for RLP encoding/decoding failures."""


class TruncatedInput(RlpError):
    """Input ended before the announced item was complete."""


class TrailingBytes(RlpError):
    """Input contained extra bytes after one complete item."""


class NonCanonical(RlpError):
    """Input decodes, but is not the canonical encoding of its value."""


class PayloadTooLarge(RlpError):
    """Item payload exceeds MAX_RLP_PAYLOAD."""


# ---------------------------------------------------------------------------
# keccak-256 (the pre-standardization Keccak variant used by Ethereum:
# keccak-f[1600], rate 1088 bits, multi-rate padding with domain byte 0x01).

_KECCAK_ROUNDS = 24

_ROUND_CONSTANTS = (
    0x0000000000000001, 0x0000000000008082, 0x800000000000808A, 0x8000000080008000,
    0x000000000000808B, 0x0000000080000001, 0x8000000080008081, 0x8000000000008009,
    0x000000000000008A, 0x0000000000000088, 0x0000000080008009, 0x000000008000000A,
    0x000000008000808B, 0x800000000000008B, 0x8000000000008089, 0x8000000000008003,
    0x8000000000008002, 0x8000000000000080, 0x000000000000800A, 0x800000008000000A,
    0x8000000080008081, 0x8000000000008080, 0x0000000080000001, 0x8000000080008008,
)

# Rotation offsets indexed by lane (x + 5*y).
_ROTATIONS = (
    0, 1, 62, 28, 27,
    36, 44, 6, 55, 20,
    3, 10, 43, 25, 39,
    41, 45, 15, 21, 8,
    18, 2, 61, 56, 14,
)

_MASK64 = (1 << 64) - 1


def _rotl64(value: int, shift: int) -> int:
    return ((value << shift) | (value >> (64 - shift))) & _MASK64


def _keccak_f1600(state: list) -> None:
    for rc in _ROUND_CONSTANTS:
        # theta
        c = [state[x] ^ state[x + 5] ^ state[x + 10] ^ state[x + 15] ^ state[x + 20]
             for x in range(5)]
        d = [c[(x - 1) % 5] ^ _rotl64(c[(x + 1) % 5], 1) for x in range(5)]
        for x in range(5):
            for y in range(0, 25, 5):
                state[x + y] ^= d[x]
        # rho + pi
        b = [0] * 25
        for x in range(5):
            for y in range(5):
                b[y + 5 * ((2 * x + 3 * y) % 5)] = _rotl64(
                    state[x + 5 * y], _ROTATIONS[x + 5 * y])
        # chi
        for x in range(5):
            for y in range(0, 25, 5):
                state[x + y] = b[x + y] ^ ((~b[(x + 1) % 5 + y]) & b[(x + 2) % 5 + y])
        # iota
        state[0] ^= rc


def keccak256(data: bytes) -> bytes:
    """Return the 32-byte keccak-256 digest of ``data``."""
    rate = 136  # 1088-bit rate for a 256-bit digest
    padded = bytearray(data)
    pad_len = rate - (len(padded) % rate)
    if pad_len == 1:
        padded += b"\x81"  # 0x01 and 0x80 collapse into one byte
    else:
        padded += b"\x01" + b"\x00" * (pad_len - 2) + b"\x80"

    state = [0] * 25
    for block_start in range(0, len(padded), rate):
        block = padded[block_start:block_start + rate]
        for i in range(rate // 8):
            state[i] ^= int.from_bytes(block[8 * i:8 * i + 8], "little")
        _keccak_f1600(state)

    return b"".join(state[i].to_bytes(8, "little") for i in range(4))


# ---------------------------------------------------------------------------
# Integer conventions.

def int_to_minimal_be(n: int) -> bytes:
    """Encode a non-negative integer as big-endian bytes with no leading zero.

    Zero encodes as the empty byte string, matching the RLP/transaction
    convention.
    """
    if n < 0:
        raise ValueError("negative integers have no minimal-BE encoding")
    if n == 0:
        return b""
    return n.to_bytes((n.bit_length() + 7) // 8, "big")


def int_from_minimal_be(data: bytes) -> int:
    """Inverse of :func:`int_to_minimal_be`; rejects leading zero bytes."""
    if data and data[0] == 0:
        raise NonCanonical("integer field has a leading zero byte")
    return int.from_bytes(data, "big")


# ---------------------------------------------------------------------------
# Hex conventions: external formats are lowercase 0x-prefixed; the parser
# accepts mixed case and an optional prefix.

def to_hex(data: bytes) -> str:
    return "0x" + data.hex()


def from_hex(text: str) -> bytes:
    if text[:2] in ("0x", "0X"):
        text = text[2:]
    try:
        return bytes.fromhex(text)
    except ValueError as exc:
        raise ValueError(f"invalid hex string: {text!r}") from exc


# ---------------------------------------------------------------------------
# RLP.

def rlp_encode(item: RlpItem) -> bytes:
    """Encode ``item`` (bytes, or arbitrarily nested lists of bytes) as RLP."""
    if isinstance(item, (bytes, bytearray)):
        data = bytes(item)
        if len(data) == 1 and data[0] < 0x80:
            return data
        return _length_prefix(len(data), 0x80) + data
    if isinstance(item, (list, tuple)):
        payload = b"".join(rlp_encode(sub) for sub in item)
        return _length_prefix(len(payload), 0xC0) + payload
    raise TypeError(f"not RLP-encodable: {type(item).__name__}")


def _length_prefix(length: int, base: int) -> bytes:
    if length > MAX_RLP_PAYLOAD:
        raise PayloadTooLarge(f"payload of {length} bytes exceeds {MAX_RLP_PAYLOAD}")
    if length <= 55:
        return bytes([base + length])
    length_bytes = int_to_minimal_be(length)
    return bytes([base + 55 + len(length_bytes)]) + length_bytes


def rlp_decode(data: bytes) -> RlpItem:
    """Decode exactly one RLP item, consuming the entire input.

    The decoder is strict: any non-canonical encoding (a single byte below
    0x80 wrapped in a string prefix, a long form used for a short payload,
    a length-of-length with a leading zero) is rejected, so re-encoding a
    decoded item always reproduces the input bytes.
    """
    if not data:
        raise TruncatedInput("empty input")
    item, consumed = _decode_at(data, 0)
    if consumed != len(data):
        raise TrailingBytes(f"{len(data) - consumed} byte(s) after first item")
    return item


def _decode_at(data: bytes, pos: int) -> tuple:
    if pos >= len(data):
        raise TruncatedInput("expected an item, found end of input")
    prefix = data[pos]

    if prefix < 0x80:  # single byte
        return data[pos:pos + 1], pos + 1

    if prefix <= 0xB7:  # short string
        length = prefix - 0x80
        end = pos + 1 + length
        if end > len(data):
            raise TruncatedInput("string extends past end of input")
        payload = data[pos + 1:end]
        if length == 1 and payload[0] < 0x80:
            raise NonCanonical("single byte below 0x80 must self-encode")
        return payload, end

    if prefix <= 0xBF:  # long string
        length, start = _decode_long_length(data, pos, prefix - 0xB7)
        end = start + length
        if end > len(data):
            raise TruncatedInput("string extends past end of input")
        return data[start:end], end

    if prefix <= 0xF7:  # short list
        length = prefix - 0xC0
        end = pos + 1 + length
        if end > len(data):
            raise TruncatedInput("list extends past end of input")
        return _decode_list(data, pos + 1, end), end

    # long list
    length, start = _decode_long_length(data, pos, prefix - 0xF7)
    end = start + length
    if end > len(data):
        raise TruncatedInput("list extends past end of input")
    return _decode_list(data, start, end), end


def _decode_long_length(data: bytes, pos: int, len_of_len: int) -> tuple:
    start = pos + 1 + len_of_len
    if start > len(data):
        raise TruncatedInput("length-of-length extends past end of input")
    length_bytes = data[pos + 1:start]
    if length_bytes[0] == 0:
        raise NonCanonical("length-of-length has a leading zero")
    length = int.from_bytes(length_bytes, "big")
    if length <= 55:
        raise NonCanonical("long form used for a short payload")
    if length > MAX_RLP_PAYLOAD:
        raise PayloadTooLarge(f"declared payload of {length} bytes exceeds {MAX_RLP_PAYLOAD}")
    return length, start


def _decode_list(data: bytes, start: int, end: int) -> list:
    items = []
    pos = start
    while pos < end:
        item, pos = _decode_at(data, pos)
        if pos > end:
            raise TruncatedInput("list element extends past list payload")
        items.append(item)
    return items
