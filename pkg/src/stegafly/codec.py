"""Payload encryption, stego header framing and bit packing.

Wire format of the 30-byte (240-bit) header, big-endian, MSB first::

    offset  size  field
    0       4     magic "HFAS"
    4       1     version 0x01
    5       1     mode (0x01 = affine scan)
    6       4     payload_len   ciphertext bytes
    10      4     scan_start
    14      4     scan_stride
    18      8     iv            Blowfish-CBC IV
    26      4     crc32         CRC-32 of the ciphertext

The IV carries a passphrase check: its last four bytes are a keyed tag of
its first four, so a wrong passphrase is rejected before the padding is
ever looked at.
"""

from __future__ import annotations

import hashlib
import hmac
import struct
import zlib
from dataclasses import dataclass

import numpy as np
from cryptography.hazmat.decrepit.ciphers.algorithms import Blowfish
from cryptography.hazmat.primitives.ciphers import Cipher, modes

from .errors import CorruptionError, FormatError, WrongKeyError

MAGIC = b"HFAS"
VERSION = 0x01
MODE_AFFINE_SCAN = 0x01
HEADER_BYTES = 30
HEADER_BITS = HEADER_BYTES * 8
BLOCK_SIZE = 8
KEY_BYTES = 16

_HEADER = struct.Struct(">4sBBIII8sI")
assert _HEADER.size == HEADER_BYTES


@dataclass(frozen=True)
class StegoHeader:
    payload_len: int
    scan_start: int
    scan_stride: int
    iv: bytes
    crc32: int
    mode: int = MODE_AFFINE_SCAN
    version: int = VERSION
    magic: bytes = MAGIC


@dataclass(frozen=True)
class CipherPayload:
    ciphertext: bytes
    iv: bytes
    crc32: int


def derive_key(passphrase: str) -> bytes:
    """128-bit Blowfish key: first 16 bytes of SHA-256(passphrase)."""
    return hashlib.sha256(passphrase.encode("utf-8")).digest()[:KEY_BYTES]


def _iv_tag(key: bytes, nonce: bytes) -> bytes:
    return hmac.new(key, b"iv-check" + nonce, hashlib.sha256).digest()[:4]


def crc32(data: bytes) -> int:
    return zlib.crc32(data) & 0xFFFFFFFF


def pkcs7_pad(data: bytes, block: int = BLOCK_SIZE) -> bytes:
    k = block - len(data) % block
    return data + bytes([k]) * k


def pkcs7_unpad(data: bytes, block: int = BLOCK_SIZE) -> bytes:
    if not data or len(data) % block:
        raise WrongKeyError("decryption failed: bad padding")
    k = data[-1]
    if not 1 <= k <= block or data[-k:] != bytes([k]) * k:
        raise WrongKeyError("decryption failed: bad padding")
    return data[:-k]


def cbc_encrypt(key: bytes, iv: bytes, data: bytes) -> bytes:
    """Raw Blowfish-CBC over whole blocks (no padding)."""
    enc = Cipher(Blowfish(key), modes.CBC(iv)).encryptor()
    return enc.update(data) + enc.finalize()


def cbc_decrypt(key: bytes, iv: bytes, data: bytes) -> bytes:
    dec = Cipher(Blowfish(key), modes.CBC(iv)).decryptor()
    return dec.update(data) + dec.finalize()


def encrypt_payload(plaintext: bytes, passphrase: str, rng: np.random.Generator) -> CipherPayload:
    """Blowfish-CBC encrypt with PKCS#7 padding and a fresh IV from ``rng``."""
    if not plaintext:
        raise ValueError("plaintext must be non-empty")
    if not passphrase:
        raise ValueError("passphrase must be non-empty")
    key = derive_key(passphrase)
    nonce = rng.bytes(4)
    iv = nonce + _iv_tag(key, nonce)
    ct = cbc_encrypt(key, iv, pkcs7_pad(bytes(plaintext)))
    return CipherPayload(ct, iv, crc32(ct))


def decrypt_payload(cp: CipherPayload, passphrase: str) -> bytes:
    """Inverse of :func:`encrypt_payload`.

    Raises :class:`CorruptionError` on CRC mismatch (checked first) and
    :class:`WrongKeyError` when the passphrase does not match.
    """
    if crc32(cp.ciphertext) != cp.crc32:
        raise CorruptionError("corrupted: ciphertext CRC mismatch")
    if len(cp.ciphertext) < BLOCK_SIZE or len(cp.ciphertext) % BLOCK_SIZE:
        raise CorruptionError("corrupted: ciphertext length is not a whole number of blocks")
    if len(cp.iv) != BLOCK_SIZE:
        raise FormatError("IV must be 8 bytes")
    key = derive_key(passphrase)
    if not hmac.compare_digest(cp.iv[4:], _iv_tag(key, cp.iv[:4])):
        raise WrongKeyError("decryption failed: passphrase does not match")
    return pkcs7_unpad(cbc_decrypt(key, cp.iv, cp.ciphertext))


def bytes_to_bits(data: bytes) -> np.ndarray:
    """MSB-first bit expansion as a ``uint8`` array of 0/1."""
    return np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8))


def bits_to_bytes(bits) -> bytes:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.ndim != 1 or bits.size % 8:
        raise FormatError(f"bit length {bits.size} is not a multiple of 8")
    if np.any(bits > 1):
        raise FormatError("bit values must be 0 or 1")
    return np.packbits(bits).tobytes()


def header_bytes(h: StegoHeader) -> bytes:
    for name in ("payload_len", "scan_start", "scan_stride", "crc32"):
        v = getattr(h, name)
        if not 0 <= v <= 0xFFFFFFFF:
            raise FormatError(f"{name}={v} does not fit in 32 bits")
    if len(h.iv) != BLOCK_SIZE:
        raise FormatError("IV must be 8 bytes")
    return _HEADER.pack(h.magic, h.version, h.mode, h.payload_len,
                        h.scan_start, h.scan_stride, h.iv, h.crc32)


def serialize_header(h: StegoHeader) -> np.ndarray:
    """240 header bits, MSB first."""
    return bytes_to_bits(header_bytes(h))


def parse_header(bits) -> StegoHeader:
    """Parse and validate 240 header bits."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size != HEADER_BITS:
        raise FormatError(f"header needs {HEADER_BITS} bits, got {bits.size}")
    magic, version, mode, length, start, stride, iv, crc = _HEADER.unpack(bits_to_bytes(bits))
    if magic != MAGIC:
        raise FormatError("not a stego image: bad magic")
    if version != VERSION:
        raise FormatError(f"unsupported header version {version}")
    if mode != MODE_AFFINE_SCAN:
        raise FormatError(f"unknown placement mode {mode}")
    if length == 0:
        raise FormatError("header declares an empty payload")
    return StegoHeader(length, start, stride, iv, crc, mode, version, magic)
