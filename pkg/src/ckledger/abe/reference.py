"""Symmetric secret-sharing emulation of ciphertext-policy key encapsulation.

A wrap key ``W`` is pushed down the normalized policy tree: an AND node hands
its children XOR shares of its secret, an OR node hands every child the
secret itself, and each leaf encrypts what it receives under the token of its
attribute.  ``W`` then seals the data key.  Anyone holding tokens for a
satisfying attribute set can rebuild ``W``; nobody else can.

This reproduces the access contract and the cost shape (work grows with the
number of policy nodes) of a real CP-ABE scheme but not its security:

* tokens are global per attribute, so two principals can pool tokens
  (no collusion resistance);
* the master secret derives every token, so the authority decrypts anything;
* the gateway transform sees ``K`` in the clear before wrapping it for the
  client.  Hiding ``K`` from the gateway needs a pairing-based backend wired
  in through the daemon protocol.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets

from ckledger import envelope
from ckledger.abe.types import (
    REFERENCE,
    CiphertextKey,
    MasterSecret,
    PartialCiphertext,
    RetrievalSecret,
    TransformKey,
    UserAttributeKey,
    key_epoch,
)
from ckledger.errors import AuthenticationError, MalformedCiphertext, NotSatisfied, PolicyError
from ckledger.policy import (
    Attribute,
    Gate,
    Leaf,
    Node,
    canonicalize,
    epoch_of,
    normalize,
    parse,
    preorder,
)

SHARE_BYTES = 32


def setup(seed: int | None = None) -> MasterSecret:
    if seed is None:
        return MasterSecret(secrets.token_bytes(32))
    return MasterSecret(hashlib.sha256(b"ckledger-setup:" + str(seed).encode()).digest())


def attribute_token(ms: MasterSecret, attr: Attribute | str) -> bytes:
    return hmac.new(ms.secret, b"attr" + str(attr).encode("utf-8"), hashlib.sha256).digest()


def keygen(ms: MasterSecret, principal: str, attrs) -> UserAttributeKey:
    attrs = set(attrs)
    if not attrs:
        raise PolicyError("cannot issue a key for an empty attribute set")
    tokens = {str(a): attribute_token(ms, a) for a in attrs}
    return UserAttributeKey(principal, tokens, key_epoch(tokens))


def _xor(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise ValueError("share length mismatch")
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(len(a), "big")


def _share(ms: MasterSecret, node: Node, secret: bytes, out: list[bytes]) -> None:
    if isinstance(node, Leaf):
        out.append(envelope.seal_with(attribute_token(ms, node.attr), secret).to_bytes())
        return
    out.append(b"")
    if node.op == "AND":
        shares = [secrets.token_bytes(SHARE_BYTES) for _ in node.children[:-1]]
        last = secret
        for s in shares:
            last = _xor(last, s)
        shares.append(last)
    else:
        shares = [secret] * len(node.children)
    for child, share in zip(node.children, shares):
        _share(ms, child, share, out)


def encrypt(ms: MasterSecret, p: Node, k: bytes) -> CiphertextKey:
    if len(k) != envelope.KEY_BYTES:
        raise ValueError("data keys are 32 bytes")
    tree = normalize(p)
    epoch = epoch_of(tree)
    wrap = secrets.token_bytes(SHARE_BYTES)
    blobs: list[bytes] = []
    _share(ms, tree, wrap, blobs)
    return CiphertextKey(
        policy_text=canonicalize(tree),
        epoch=0 if epoch is None else epoch,
        share_tree=tuple(blobs),
        wrapped_key=envelope.seal_with(wrap, k).to_bytes(),
        backend=REFERENCE,
    )


def _tree_for(ck: CiphertextKey) -> Node:
    if ck.backend != REFERENCE:
        raise MalformedCiphertext(f"ciphertext key belongs to the {ck.backend} backend")
    try:
        tree = parse(ck.policy_text)
    except PolicyError as exc:
        raise MalformedCiphertext(f"unparseable policy text: {exc}") from None
    nodes = list(preorder(tree))
    if len(nodes) != len(ck.share_tree):
        raise MalformedCiphertext("share tree does not match policy shape")
    for node, blob in zip(nodes, ck.share_tree):
        if isinstance(node, Gate) == bool(blob):
            raise MalformedCiphertext("share tree does not match policy shape")
    return tree


def _recover(tree: Node, blobs: list[bytes], pos: int, tokens: dict[str, bytes]) -> tuple[bytes | None, int]:
    """Return ``(secret or None, next preorder index)`` for the subtree at ``pos``."""
    if isinstance(tree, Leaf):
        token = tokens.get(str(tree.attr))
        if token is None:
            return None, pos + 1
        try:
            return envelope.open_sealed(token, blobs[pos]), pos + 1
        except AuthenticationError:
            return None, pos + 1
    pos += 1
    parts = []
    for child in tree.children:
        part, pos = _recover(child, blobs, pos, tokens)
        parts.append(part)
    if tree.op == "AND":
        if any(p is None for p in parts):
            return None, pos
        secret = parts[0]
        for p in parts[1:]:
            secret = _xor(secret, p)
        return secret, pos
    return next((p for p in parts if p is not None), None), pos


def _unwrap(tokens: dict[str, bytes], ck: CiphertextKey) -> bytes:
    tree = _tree_for(ck)
    wrap, _ = _recover(tree, list(ck.share_tree), 0, tokens)
    if wrap is None:
        raise NotSatisfied(f"attributes do not satisfy {ck.policy_text}")
    try:
        return envelope.open_sealed(wrap, ck.wrapped_key)
    except AuthenticationError:
        raise MalformedCiphertext("wrapped key failed to open under the rebuilt wrap key") from None


def decrypt(uk: UserAttributeKey, ck: CiphertextKey) -> bytes:
    return _unwrap(uk.tokens, ck)


def leaf_shares(uk: UserAttributeKey, ck: CiphertextKey) -> dict[str, bytes]:
    """Shares this key can open individually, keyed by leaf attribute text."""
    tree = _tree_for(ck)
    out = {}
    for node, blob in zip(preorder(tree), ck.share_tree):
        if isinstance(node, Leaf) and str(node.attr) in uk.tokens:
            out[str(node.attr)] = envelope.open_sealed(uk.tokens[str(node.attr)], blob)
    return out


def transform_keygen(uk: UserAttributeKey) -> tuple[TransformKey, RetrievalSecret]:
    return TransformKey(uk.principal, dict(uk.tokens)), RetrievalSecret(secrets.token_bytes(32))


def transform(tk: TransformKey, ck: CiphertextKey, ek: RetrievalSecret) -> PartialCiphertext:
    """Gateway side: rebuild the data key and rewrap it for the client."""
    if not tk.gateway_scoped:
        raise ValueError("transform keys must be gateway scoped")
    k = _unwrap(tk.tokens, ck)
    return PartialCiphertext(envelope.seal_with(ek.secret, k).to_bytes())


def finish(ek: RetrievalSecret, pc: PartialCiphertext) -> bytes:
    return envelope.open_sealed(ek.secret, pc.blob)


class ReferenceBackend:
    """Binds the functional API to one master secret."""

    name = REFERENCE

    def __init__(self, ms: MasterSecret | None = None) -> None:
        self.ms = ms if ms is not None else setup()

    def keygen(self, principal: str, attrs) -> UserAttributeKey:
        return keygen(self.ms, principal, attrs)

    def encrypt(self, p: Node, k: bytes) -> CiphertextKey:
        return encrypt(self.ms, p, k)

    def decrypt(self, uk: UserAttributeKey, ck: CiphertextKey) -> bytes:
        return decrypt(uk, ck)

    transform_keygen = staticmethod(transform_keygen)
    transform = staticmethod(transform)
    finish = staticmethod(finish)
