"""Key management and legacy-transaction signing with replay protection.

The workbench custodies one deployer key per application; keys are held
encrypted (scrypt-derived key, AES-256-GCM) and only decrypted for the
duration of a signing operation. Transactions are the pre-typed-envelope
kind, with the chain id folded into the signing preimage and into v.
"""

from __future__ import annotations

import secrets as _secrets
from dataclasses import dataclass, field
from typing import Optional

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
import hashlib

from . import secp256k1 as curve
from .codec import (
    NonCanonical,
    RlpError,
    from_hex,
    int_from_minimal_be,
    int_to_minimal_be,
    keccak256,
    rlp_decode,
    rlp_encode,
    to_hex,
)
from .secp256k1 import BadSignature, PointNotOnCurve


class MalformedRlp(ValueError):
    """Raw transaction bytes are not a canonical 9-field RLP list."""


class HighS(ValueError):
    """Signature s is in the high half of the group order."""


class WrongChainId(ValueError):
    """v does not encode a replay-protected chain id."""


class MacMismatch(ValueError):
    """Keystore passphrase wrong or ciphertext tampered with."""


@dataclass(frozen=True)
class LegacyTransaction:
    nonce: int
    gas_price: int
    gas_limit: int
    to: Optional[bytes]  # 20 bytes, or None for contract creation
    value: int
    data: bytes
    chain_id: int

    def __post_init__(self):
        if self.chain_id < 1:
            raise ValueError("chain_id must be >= 1")
        if self.gas_limit <= 0:
            raise ValueError("gas_limit must be positive")
        if self.to is None and not self.data:
            raise ValueError("contract creation requires non-empty data")
        if self.to is not None and len(self.to) != 20:
            raise ValueError("to must be exactly 20 bytes")
        if self.nonce < 0 or self.gas_price < 0 or self.value < 0:
            raise ValueError("integer fields must be non-negative")

    @property
    def is_creation(self) -> bool:
        return self.to is None


@dataclass(frozen=True)
class Signature:
    r: int
    s: int
    v: int


def generate_keypair(entropy: Optional[bytes] = None) -> tuple:
    """Derive a (secret scalar, address) pair from 32 bytes of entropy.

    If the candidate scalar falls outside [1, order) it is re-drawn by
    hashing, so any entropy value yields a key deterministically.
    """
    if entropy is None:
        entropy = _secrets.token_bytes(32)
    if len(entropy) != 32:
        raise ValueError("entropy must be exactly 32 bytes")
    candidate = entropy
    while True:
        scalar = int.from_bytes(candidate, "big")
        if 1 <= scalar < curve.N:
            break
        candidate = keccak256(candidate)
    return scalar, derive_address(curve.pubkey_bytes(scalar))


def derive_address(pubkey64: bytes) -> bytes:
    """Last 20 bytes of keccak256 of the 64-byte uncompressed public point."""
    if len(pubkey64) != 64:
        raise PointNotOnCurve("public key must be 64 bytes (no prefix byte)")
    x = int.from_bytes(pubkey64[:32], "big")
    y = int.from_bytes(pubkey64[32:], "big")
    if not curve.on_curve(x, y):
        raise PointNotOnCurve("point is not on the curve")
    return keccak256(pubkey64)[12:]


def _tx_base_fields(tx: LegacyTransaction) -> list:
    return [
        int_to_minimal_be(tx.nonce),
        int_to_minimal_be(tx.gas_price),
        int_to_minimal_be(tx.gas_limit),
        tx.to if tx.to is not None else b"",
        int_to_minimal_be(tx.value),
        tx.data,
    ]


def signing_hash(tx: LegacyTransaction) -> bytes:
    """Replay-protected preimage: the six tx fields, chain id, and two zeros."""
    fields = _tx_base_fields(tx) + [int_to_minimal_be(tx.chain_id), b"", b""]
    return keccak256(rlp_encode(fields))


def sign_transaction(tx: LegacyTransaction, secret: int) -> bytes:
    """Sign and serialize; returns the raw RLP ready for broadcast."""
    r, s, recovery_id = curve.sign(signing_hash(tx), secret)
    v = tx.chain_id * 2 + 35 + recovery_id
    fields = _tx_base_fields(tx) + [
        int_to_minimal_be(v),
        int_to_minimal_be(r),
        int_to_minimal_be(s),
    ]
    return rlp_encode(fields)


def recover_sender(raw: bytes) -> tuple:
    """Parse raw signed bytes, recover the signer: (address, tx, signature).

    Strict on every axis: canonical RLP, minimal integer fields, low s,
    and a replay-protected v. Re-encoding the parsed transaction always
    reproduces ``raw`` bit-exactly.
    """
    try:
        items = rlp_decode(raw)
    except RlpError as exc:
        raise MalformedRlp(str(exc)) from exc
    if not isinstance(items, list) or len(items) != 9:
        raise MalformedRlp("expected a 9-field transaction list")
    if not all(isinstance(f, bytes) for f in items):
        raise MalformedRlp("transaction fields must be byte strings")

    try:
        nonce = int_from_minimal_be(items[0])
        gas_price = int_from_minimal_be(items[1])
        gas_limit = int_from_minimal_be(items[2])
        value = int_from_minimal_be(items[4])
        v = int_from_minimal_be(items[6])
        r = int_from_minimal_be(items[7])
        s = int_from_minimal_be(items[8])
    except NonCanonical as exc:
        raise MalformedRlp(str(exc)) from exc

    to_field = items[3]
    if to_field == b"":
        to = None
    elif len(to_field) == 20:
        to = to_field
    else:
        raise MalformedRlp("to must be empty or 20 bytes")

    if v < 35:
        raise WrongChainId(f"v={v} carries no chain id")
    chain_id = (v - 35) >> 1
    if chain_id < 1:
        raise WrongChainId(f"v={v} implies chain id {chain_id}")
    if s > curve.HALF_N:
        raise HighS("signature s is not normalized")

    try:
        tx = LegacyTransaction(nonce, gas_price, gas_limit, to, value, items[5], chain_id)
    except ValueError as exc:
        raise MalformedRlp(str(exc)) from exc

    recovery_id = (v - 35) & 1
    pub = curve.recover(signing_hash(tx), r, s, recovery_id)
    sender = keccak256(pub[0].to_bytes(32, "big") + pub[1].to_bytes(32, "big"))[12:]

    if sign_fields_reencode(tx, v, r, s) != raw:
        raise MalformedRlp("re-encoding differs from wire bytes")
    return sender, tx, Signature(r, s, v)


def sign_fields_reencode(tx: LegacyTransaction, v: int, r: int, s: int) -> bytes:
    fields = _tx_base_fields(tx) + [
        int_to_minimal_be(v), int_to_minimal_be(r), int_to_minimal_be(s)]
    return rlp_encode(fields)


# ---------------------------------------------------------------------------
# Encrypted keystore.

# Default work factor tuned so one decrypt costs on the order of 100 ms;
# tests may pass lighter parameters.
DEFAULT_KDF_N = 2 ** 15
DEFAULT_KDF_R = 8
DEFAULT_KDF_P = 1


@dataclass(frozen=True)
class EncryptedKeystore:
    ciphertext: bytes
    mac: bytes          # 16-byte GCM tag
    nonce: bytes        # 12-byte GCM nonce
    salt: bytes         # 16-byte scrypt salt
    kdf_n: int = DEFAULT_KDF_N
    kdf_r: int = DEFAULT_KDF_R
    kdf_p: int = DEFAULT_KDF_P

    def to_dict(self) -> dict:
        return {
            "ciphertext": to_hex(self.ciphertext),
            "mac": to_hex(self.mac),
            "nonce": to_hex(self.nonce),
            "salt": to_hex(self.salt),
            "kdf": {"name": "scrypt", "n": self.kdf_n, "r": self.kdf_r, "p": self.kdf_p},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EncryptedKeystore":
        kdf = doc["kdf"]
        return cls(
            ciphertext=from_hex(doc["ciphertext"]),
            mac=from_hex(doc["mac"]),
            nonce=from_hex(doc["nonce"]),
            salt=from_hex(doc["salt"]),
            kdf_n=kdf["n"], kdf_r=kdf["r"], kdf_p=kdf["p"],
        )


def _derive_cipher_key(passphrase: str, salt: bytes, n: int, r: int, p: int) -> bytes:
    return hashlib.scrypt(passphrase.encode("utf-8"), salt=salt,
                          n=n, r=r, p=p, maxmem=256 * 1024 * 1024, dklen=32)


def encrypt_key(secret: int, passphrase: str, *,
                kdf_n: int = DEFAULT_KDF_N, kdf_r: int = DEFAULT_KDF_R,
                kdf_p: int = DEFAULT_KDF_P) -> EncryptedKeystore:
    if not passphrase:
        raise ValueError("passphrase must not be empty")
    salt = _secrets.token_bytes(16)
    nonce = _secrets.token_bytes(12)
    key = _derive_cipher_key(passphrase, salt, kdf_n, kdf_r, kdf_p)
    sealed = AESGCM(key).encrypt(nonce, secret.to_bytes(32, "big"), b"")
    return EncryptedKeystore(
        ciphertext=sealed[:-16], mac=sealed[-16:], nonce=nonce, salt=salt,
        kdf_n=kdf_n, kdf_r=kdf_r, kdf_p=kdf_p)


def decrypt_key(keystore: EncryptedKeystore, passphrase: str) -> int:
    key = _derive_cipher_key(passphrase, keystore.salt,
                             keystore.kdf_n, keystore.kdf_r, keystore.kdf_p)
    try:
        plain = AESGCM(key).decrypt(
            keystore.nonce, keystore.ciphertext + keystore.mac, b"")
    except InvalidTag as exc:
        raise MacMismatch("keystore MAC verification failed") from exc
    return int.from_bytes(plain, "big")
