"""Ciphertext-policy key encapsulation backends."""

from ckledger.abe.daemon import DaemonBackend, DaemonClient, daemon_roundtrip
from ckledger.abe.reference import (
    ReferenceBackend,
    decrypt,
    encrypt,
    finish,
    keygen,
    setup,
    transform,
    transform_keygen,
)
from ckledger.abe.types import (
    CiphertextKey,
    MasterSecret,
    PartialCiphertext,
    RetrievalSecret,
    TransformKey,
    UserAttributeKey,
)

__all__ = [
    "CiphertextKey",
    "DaemonBackend",
    "DaemonClient",
    "MasterSecret",
    "PartialCiphertext",
    "ReferenceBackend",
    "RetrievalSecret",
    "TransformKey",
    "UserAttributeKey",
    "daemon_roundtrip",
    "decrypt",
    "encrypt",
    "finish",
    "keygen",
    "setup",
    "transform",
    "transform_keygen",
]
