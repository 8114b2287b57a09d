"""Line-protocol daemon that serves the reference backend.

Run with ``python -m ckledger.abe.server [--seed N]``.  It exists so the
daemon client and backend routing can be exercised end to end; a
pairing-based implementation can replace it without touching the client.
"""

from __future__ import annotations

import argparse
import base64
import binascii
import json
import sys
from typing import Any, TextIO

from ckledger.abe import reference
from ckledger.abe.types import CiphertextKey, UserAttributeKey
from ckledger.errors import CKLedgerError, NotSatisfied
from ckledger.policy import Attribute, parse


class ReferenceDaemon:
    def __init__(self, seed: int | None = None) -> None:
        self.ms = reference.setup(seed)

    def handle(self, message: Any) -> dict[str, Any]:
        if not isinstance(message, dict):
            return {"ok": False, "error": "bad_request"}
        op = message.get("op")
        handler = getattr(self, f"op_{op}", None) if isinstance(op, str) else None
        if handler is None:
            return {"ok": False, "error": "unknown_op"}
        try:
            return {"ok": True, **handler(message)}
        except NotSatisfied:
            return {"ok": False, "error": "not_satisfied"}
        except (KeyError, TypeError, ValueError, binascii.Error, CKLedgerError) as exc:
            return {"ok": False, "error": f"bad_request: {exc}"}

    def op_setup(self, message: dict[str, Any]) -> dict[str, Any]:
        self.ms = reference.setup(message.get("seed"))
        return {}

    def op_keygen(self, message: dict[str, Any]) -> dict[str, Any]:
        attrs = {Attribute.parse(a) for a in message["attrs"]}
        uk = reference.keygen(self.ms, message["principal"], attrs)
        return {"key_b64": _b64(uk.to_json().encode("utf-8"))}

    def op_encrypt(self, message: dict[str, Any]) -> dict[str, Any]:
        k = base64.b64decode(message["key_b64"], validate=True)
        ck = reference.encrypt(self.ms, parse(message["policy"]), k)
        return {"ck_b64": _b64(ck.to_bytes())}

    def op_decrypt(self, message: dict[str, Any]) -> dict[str, Any]:
        uk = UserAttributeKey.from_json(base64.b64decode(message["user_key_b64"], validate=True))
        ck = CiphertextKey.from_bytes(base64.b64decode(message["ck_b64"], validate=True))
        return {"key_b64": _b64(reference.decrypt(uk, ck))}


def _b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def serve(stdin: TextIO, stdout: TextIO, daemon: ReferenceDaemon) -> None:
    for line in stdin:
        if not line.strip():
            continue
        try:
            message = json.loads(line)
        except json.JSONDecodeError:
            reply: dict[str, Any] = {"ok": False, "error": "bad_request"}
        else:
            reply = daemon.handle(message)
        stdout.write(json.dumps(reply, separators=(",", ":")) + "\n")
        stdout.flush()


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)
    serve(sys.stdin, sys.stdout, ReferenceDaemon(args.seed))


if __name__ == "__main__":
    main()
