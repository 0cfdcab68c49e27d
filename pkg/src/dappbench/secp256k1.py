"""secp256k1 point arithmetic and recoverable ECDSA.

Self-contained implementation used by the wallet for signing and by the
mock chain for sender recovery. Scalar multiplication runs in Jacobian
coordinates; nonces come from RFC 6979 (HMAC-SHA256), so signatures are
deterministic. Produced signatures are always low-s.
"""

from __future__ import annotations

import hashlib
import hmac

P = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F
N = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
GX = 0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798
GY = 0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8
HALF_N = N // 2


class BadSignature(ValueError):
    """Signature components invalid or no public key recoverable."""


class PointNotOnCurve(ValueError):
    pass


def on_curve(x: int, y: int) -> bool:
    return 0 <= x < P and 0 <= y < P and (y * y - x * x * x - 7) % P == 0


# Jacobian coordinates: (X, Y, Z) represents (X/Z^2, Y/Z^3).

def _jac_double(pt):
    x, y, z = pt
    if y == 0:
        return (0, 0, 0)
    ysq = y * y % P
    s = 4 * x * ysq % P
    m = 3 * x * x % P
    nx = (m * m - 2 * s) % P
    ny = (m * (s - nx) - 8 * ysq * ysq) % P
    nz = 2 * y * z % P
    return (nx, ny, nz)


def _jac_add(p1, p2):
    if p1[2] == 0:
        return p2
    if p2[2] == 0:
        return p1
    x1, y1, z1 = p1
    x2, y2, z2 = p2
    z1sq = z1 * z1 % P
    z2sq = z2 * z2 % P
    u1 = x1 * z2sq % P
    u2 = x2 * z1sq % P
    s1 = y1 * z2sq * z2 % P
    s2 = y2 * z1sq * z1 % P
    if u1 == u2:
        if s1 != s2:
            return (0, 0, 0)
        return _jac_double(p1)
    h = (u2 - u1) % P
    r = (s2 - s1) % P
    hsq = h * h % P
    hcu = hsq * h % P
    nx = (r * r - hcu - 2 * u1 * hsq) % P
    ny = (r * (u1 * hsq - nx) - s1 * hcu) % P
    nz = h * z1 * z2 % P
    return (nx, ny, nz)


def _jac_to_affine(pt):
    x, y, z = pt
    if z == 0:
        return None
    zinv = pow(z, P - 2, P)
    zinv_sq = zinv * zinv % P
    return (x * zinv_sq % P, y * zinv_sq * zinv % P)


def point_mul(k: int, point=None):
    """k * point in affine coordinates; None means the point at infinity."""
    if point is None:
        point = (GX, GY)
    k %= N
    if k == 0 or point is None:
        return None
    acc = (0, 0, 0)
    addend = (point[0], point[1], 1)
    while k:
        if k & 1:
            acc = _jac_add(acc, addend)
        addend = _jac_double(addend)
        k >>= 1
    return _jac_to_affine(acc)


def point_add(p1, p2):
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    return _jac_to_affine(_jac_add((p1[0], p1[1], 1), (p2[0], p2[1], 1)))


def pubkey_bytes(secret: int) -> bytes:
    """64-byte uncompressed public point (no 0x04 prefix)."""
    point = point_mul(secret)
    return point[0].to_bytes(32, "big") + point[1].to_bytes(32, "big")


def _rfc6979_nonces(msg_hash32: bytes, secret: int):
    """Yield deterministic nonce candidates per RFC 6979 (SHA-256)."""
    z = int.from_bytes(msg_hash32, "big") % N
    key = b"\x00" * 32
    v = b"\x01" * 32
    seed = secret.to_bytes(32, "big") + z.to_bytes(32, "big")
    key = hmac.new(key, v + b"\x00" + seed, hashlib.sha256).digest()
    v = hmac.new(key, v, hashlib.sha256).digest()
    key = hmac.new(key, v + b"\x01" + seed, hashlib.sha256).digest()
    v = hmac.new(key, v, hashlib.sha256).digest()
    while True:
        v = hmac.new(key, v, hashlib.sha256).digest()
        k = int.from_bytes(v, "big")
        if 1 <= k < N:
            yield k
        key = hmac.new(key, v + b"\x00", hashlib.sha256).digest()
        v = hmac.new(key, v, hashlib.sha256).digest()


def sign(msg_hash32: bytes, secret: int) -> tuple:
    """ECDSA-sign a 32-byte digest; returns (r, s, recovery_id), s low."""
    if not 1 <= secret < N:
        raise ValueError("secret scalar out of range")
    z = int.from_bytes(msg_hash32, "big")
    for k in _rfc6979_nonces(msg_hash32, secret):
        point = point_mul(k)
        r = point[0] % N
        if r == 0 or point[0] >= N:
            # r == 0 is unusable; x >= N would need recovery ids 2/3, which
            # the v encoding downstream cannot express. Both are ~2^-128.
            continue
        s = pow(k, N - 2, N) * (z + r * secret) % N
        if s == 0:
            continue
        recovery_id = point[1] & 1
        if s > HALF_N:
            s = N - s
            recovery_id ^= 1
        return r, s, recovery_id
    raise AssertionError("unreachable")


def recover(msg_hash32: bytes, r: int, s: int, recovery_id: int):
    """Recover the signing public key as an affine point.

    Only recovery ids 0 and 1 are accepted (r is taken as the nonce
    point's x coordinate directly).
    """
    if recovery_id not in (0, 1):
        raise BadSignature(f"recovery id {recovery_id} not in {{0,1}}")
    if not (1 <= r < N and 1 <= s < N):
        raise BadSignature("r and s must be in [1, N)")
    # rebuild the nonce point R from its x coordinate and y parity
    alpha = (r * r * r + 7) % P
    y = pow(alpha, (P + 1) // 4, P)
    if y * y % P != alpha:
        raise BadSignature("r is not the x coordinate of a curve point")
    if y & 1 != recovery_id:
        y = P - y
    big_r = (r, y)
    z = int.from_bytes(msg_hash32, "big")
    r_inv = pow(r, N - 2, N)
    u1 = (-z * r_inv) % N
    u2 = (s * r_inv) % N
    pub = point_add(point_mul(u1), point_mul(u2, big_r))
    if pub is None:
        raise BadSignature("recovered the point at infinity")
    return pub


def verify(msg_hash32: bytes, r: int, s: int, pub) -> bool:
    if not (1 <= r < N and 1 <= s < N):
        return False
    z = int.from_bytes(msg_hash32, "big")
    s_inv = pow(s, N - 2, N)
    u1 = z * s_inv % N
    u2 = r * s_inv % N
    point = point_add(point_mul(u1), point_mul(u2, pub))
    return point is not None and point[0] % N == r
