"""AES-256-GCM payload sealing with a fresh data key per object.

Serialized layout is ``nonce (12) || ciphertext || tag (16)``.  No associated
data is bound here; the ledger record ties a CID to its metadata.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from ckledger.errors import AuthenticationError

KEY_BYTES = 32
NONCE_BYTES = 12
TAG_BYTES = 16


@dataclass(frozen=True)
class SealedPayload:
    nonce: bytes
    ciphertext: bytes
    tag: bytes

    def __post_init__(self) -> None:
        if len(self.nonce) != NONCE_BYTES or len(self.tag) != TAG_BYTES:
            raise AuthenticationError("malformed sealed payload")

    def to_bytes(self) -> bytes:
        return self.nonce + self.ciphertext + self.tag

    @classmethod
    def from_bytes(cls, blob: bytes) -> "SealedPayload":
        if len(blob) < NONCE_BYTES + TAG_BYTES:
            raise AuthenticationError("sealed payload is truncated")
        return cls(blob[:NONCE_BYTES], blob[NONCE_BYTES:-TAG_BYTES], blob[-TAG_BYTES:])

    def __len__(self) -> int:
        return NONCE_BYTES + len(self.ciphertext) + TAG_BYTES


def new_key() -> bytes:
    return secrets.token_bytes(KEY_BYTES)


def seal_with(key: bytes, plaintext: bytes) -> SealedPayload:
    if len(key) != KEY_BYTES:
        raise ValueError("data keys are 32 bytes")
    nonce = secrets.token_bytes(NONCE_BYTES)
    out = AESGCM(key).encrypt(nonce, plaintext, None)
    return SealedPayload(nonce, out[:-TAG_BYTES], out[-TAG_BYTES:])


def seal(plaintext: bytes) -> tuple[bytes, SealedPayload]:
    """Encrypt under a freshly drawn key; returns ``(key, sealed)``."""
    key = new_key()
    return key, seal_with(key, plaintext)


def open_sealed(key: bytes, cf: SealedPayload | bytes) -> bytes:
    if isinstance(cf, (bytes, bytearray, memoryview)):
        cf = SealedPayload.from_bytes(bytes(cf))
    if len(key) != KEY_BYTES:
        raise AuthenticationError("authentication failed")
    try:
        return AESGCM(key).decrypt(cf.nonce, cf.ciphertext + cf.tag, None)
    except InvalidTag:
        raise AuthenticationError("authentication failed") from None


# ``open`` mirrors ``seal``; module attribute access keeps the builtin intact.
open = open_sealed  # noqa: A001
