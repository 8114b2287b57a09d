"""Client for an external ABE daemon speaking newline-delimited JSON.

Each request is one UTF-8 JSON object on the child's stdin; the daemon answers
with exactly one JSON line on stdout, in order.  Binary fields are base64.
Every response carries ``ok`` plus either result fields or ``error``::

    {"op": "setup", "seed": 7}                          -> {"ok": true}
    {"op": "keygen", "principal": "p", "attrs": [...]}  -> {"ok": true, "key_b64": ...}
    {"op": "encrypt", "policy": "...", "key_b64": ...}  -> {"ok": true, "ck_b64": ...}
    {"op": "decrypt", "user_key_b64": ..., "ck_b64": ...}
                                                        -> {"ok": true, "key_b64": ...}
                                                        |  {"ok": false, "error": "not_satisfied"}
"""

from __future__ import annotations

import base64
import json
import queue
import subprocess
import threading
from collections import deque
from typing import Any, Sequence

from ckledger.abe.types import DAEMON, CiphertextKey, UserAttributeKey
from ckledger.errors import DaemonError, DaemonExited, DaemonTimeout, NotSatisfied
from ckledger.policy import Node, canonicalize, epoch_of, parse

DEFAULT_TIMEOUT_S = 10.0

_EOF = object()


class DaemonClient:
    """One child process, one request in flight at a time."""

    def __init__(self, argv: Sequence[str], timeout: float = DEFAULT_TIMEOUT_S) -> None:
        self.argv = list(argv)
        self.timeout = timeout
        self._proc = subprocess.Popen(
            self.argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            encoding="utf-8",
            bufsize=1,
        )
        self._lines: queue.Queue = queue.Queue()
        self._stderr: deque[str] = deque(maxlen=20)
        self._lock = threading.Lock()
        threading.Thread(target=self._pump_stdout, daemon=True).start()
        threading.Thread(target=self._pump_stderr, daemon=True).start()

    def _pump_stdout(self) -> None:
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(_EOF)

    def _pump_stderr(self) -> None:
        assert self._proc.stderr is not None
        for line in self._proc.stderr:
            self._stderr.append(line.rstrip())

    def _exited(self) -> DaemonExited:
        code = self._proc.wait(timeout=5)
        tail = " | ".join(self._stderr) or "<no stderr>"
        return DaemonExited(f"daemon exited with status {code}; stderr: {tail}")

    def request(self, message: dict[str, Any]) -> dict[str, Any]:
        """Send one message and return the daemon's reply verbatim."""
        with self._lock:
            if self._proc.poll() is not None:
                raise self._exited()
            try:
                assert self._proc.stdin is not None
                self._proc.stdin.write(json.dumps(message, separators=(",", ":")) + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError):
                raise self._exited() from None
            try:
                line = self._lines.get(timeout=self.timeout)
            except queue.Empty:
                # the reply stream is now out of step; the process is unusable
                self.close()
                raise DaemonTimeout(f"no reply within {self.timeout} s") from None
            if line is _EOF:
                raise self._exited()
        try:
            reply = json.loads(line)
        except json.JSONDecodeError:
            raise DaemonError(f"malformed daemon reply: {line.strip()[:200]!r}") from None
        if not isinstance(reply, dict) or not isinstance(reply.get("ok"), bool):
            raise DaemonError(f"daemon reply lacks an ok flag: {line.strip()[:200]!r}")
        return reply

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                assert self._proc.stdin is not None
                self._proc.stdin.close()
                self._proc.wait(timeout=2)
            except (OSError, subprocess.TimeoutExpired):
                self._proc.kill()
                self._proc.wait()

    def kill(self) -> None:
        self._proc.kill()

    def __enter__(self) -> "DaemonClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def daemon_roundtrip(client: DaemonClient, request: dict[str, Any]) -> dict[str, Any]:
    return client.request(request)


def _b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def _unb64(reply: dict[str, Any], field: str) -> bytes:
    try:
        return base64.b64decode(reply[field], validate=True)
    except (KeyError, TypeError, ValueError):
        raise DaemonError(f"daemon reply missing or bad {field}") from None


class DaemonBackend:
    """Routes keygen/encrypt/decrypt to an external daemon."""

    name = DAEMON

    def __init__(self, client: DaemonClient) -> None:
        self.client = client

    def _call(self, message: dict[str, Any]) -> dict[str, Any]:
        reply = self.client.request(message)
        if not reply["ok"]:
            error = reply.get("error", "unknown_error")
            if error == "not_satisfied":
                raise NotSatisfied("daemon reports policy not satisfied")
            raise DaemonError(error)
        return reply

    def setup(self, seed: int | None = None) -> None:
        message: dict[str, Any] = {"op": "setup"}
        if seed is not None:
            message["seed"] = seed
        self._call(message)

    def keygen(self, principal: str, attrs) -> UserAttributeKey:
        names = sorted(str(a) for a in attrs)
        reply = self._call({"op": "keygen", "principal": principal, "attrs": names})
        epochs = [int(a.split("=", 1)[1]) for a in names if a.startswith("epoch=")]
        return UserAttributeKey(
            principal,
            tokens={},
            epoch=epochs[0] if len(epochs) == 1 else None,
            opaque=_unb64(reply, "key_b64"),
        )

    def encrypt(self, p: Node, k: bytes) -> CiphertextKey:
        text = canonicalize(p)
        reply = self._call({"op": "encrypt", "policy": text, "key_b64": _b64(k)})
        epoch = epoch_of(parse(text))
        return CiphertextKey(text, 0 if epoch is None else epoch, (), _unb64(reply, "ck_b64"), DAEMON)

    def decrypt(self, uk: UserAttributeKey, ck: CiphertextKey) -> bytes:
        if uk.opaque is None:
            raise DaemonError("user key was not issued by a daemon")
        reply = self._call(
            {"op": "decrypt", "user_key_b64": _b64(uk.opaque), "ck_b64": _b64(ck.wrapped_key)}
        )
        return _unb64(reply, "key_b64")

    def close(self) -> None:
        self.client.close()
