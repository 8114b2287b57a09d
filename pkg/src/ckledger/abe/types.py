"""Key and ciphertext containers shared by every ABE backend."""

from __future__ import annotations

import base64
import json
import struct
from dataclasses import dataclass, field

from ckledger.errors import MalformedCiphertext
from ckledger.policy import EPOCH, Attribute

CK_MAGIC = b"CKEY"
CK_VERSION = 1

REFERENCE = "reference"
DAEMON = "daemon"
_BACKEND_TAGS = {REFERENCE: 0, DAEMON: 1}
_BACKEND_NAMES = {v: k for k, v in _BACKEND_TAGS.items()}


@dataclass(frozen=True)
class MasterSecret:
    secret: bytes = field(repr=False)

    def __post_init__(self) -> None:
        if len(self.secret) != 32:
            raise ValueError("master secret must be 32 bytes")


@dataclass
class UserAttributeKey:
    """Attribute tokens held by one principal.

    ``opaque`` carries a backend-native key when the key was issued by an
    external daemon; the token map is empty in that case.
    """

    principal: str
    tokens: dict[str, bytes] = field(repr=False)
    epoch: int | None = None
    opaque: bytes | None = field(default=None, repr=False)

    @property
    def attributes(self) -> set[Attribute]:
        return {Attribute.parse(a) for a in self.tokens}

    @property
    def attribute_names(self) -> list[str]:
        return sorted(self.tokens)

    def to_json(self) -> str:
        return json.dumps(
            {
                "principal": self.principal,
                "epoch": self.epoch,
                "tokens": {k: _b64(v) for k, v in sorted(self.tokens.items())},
                "opaque": _b64(self.opaque) if self.opaque is not None else None,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str | bytes) -> "UserAttributeKey":
        data = json.loads(text)
        return cls(
            principal=data["principal"],
            tokens={k: _unb64(v) for k, v in data["tokens"].items()},
            epoch=data.get("epoch"),
            opaque=_unb64(data["opaque"]) if data.get("opaque") else None,
        )


def key_epoch(tokens: dict[str, bytes]) -> int | None:
    epochs = [int(a.split("=", 1)[1]) for a in tokens if a.startswith(EPOCH + "=")]
    return epochs[0] if len(epochs) == 1 else None


@dataclass(frozen=True)
class CiphertextKey:
    """Policy-bound encapsulation of a data key.

    ``share_tree`` holds one blob per node of the normalized policy in
    preorder; gates carry empty blobs and leaves carry their encrypted share.
    Daemon ciphertexts keep ``share_tree`` empty and store the backend-native
    bytes in ``wrapped_key``.
    """

    policy_text: str
    epoch: int
    share_tree: tuple[bytes, ...]
    wrapped_key: bytes
    backend: str = REFERENCE

    def to_bytes(self) -> bytes:
        policy = self.policy_text.encode("utf-8")
        out = [
            CK_MAGIC,
            bytes([CK_VERSION, _BACKEND_TAGS[self.backend]]),
            struct.pack(">I", len(policy)),
            policy,
            struct.pack(">QI", self.epoch, len(self.share_tree)),
        ]
        for blob in self.share_tree:
            out.append(struct.pack(">I", len(blob)))
            out.append(blob)
        out.append(struct.pack(">I", len(self.wrapped_key)))
        out.append(self.wrapped_key)
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "CiphertextKey":
        reader = _Reader(data)
        if reader.take(4) != CK_MAGIC:
            raise MalformedCiphertext("bad ciphertext key magic")
        version, tag = reader.take(2)
        if version != CK_VERSION or tag not in _BACKEND_NAMES:
            raise MalformedCiphertext("unsupported ciphertext key version or backend")
        policy = reader.take(reader.u32())
        epoch, count = struct.unpack(">QI", reader.take(12))
        shares = tuple(reader.take(reader.u32()) for _ in range(count))
        wrapped = reader.take(reader.u32())
        if not reader.done():
            raise MalformedCiphertext("trailing bytes after ciphertext key")
        try:
            text = policy.decode("utf-8")
        except UnicodeDecodeError:
            raise MalformedCiphertext("policy text is not UTF-8") from None
        return cls(text, epoch, shares, wrapped, _BACKEND_NAMES[tag])


@dataclass(frozen=True)
class TransformKey:
    principal: str
    tokens: dict[str, bytes] = field(repr=False)
    gateway_scoped: bool = True


@dataclass(frozen=True)
class RetrievalSecret:
    secret: bytes = field(repr=False)


@dataclass(frozen=True)
class PartialCiphertext:
    blob: bytes


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.data):
            raise MalformedCiphertext("ciphertext key is truncated")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def done(self) -> bool:
        return self.pos == len(self.data)


def _b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def _unb64(text: str) -> bytes:
    return base64.b64decode(text.encode("ascii"), validate=True)
