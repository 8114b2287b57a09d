"""Local content-addressed blob store keyed by SHA-256.

Objects live at ``<root>/<first two hex chars>/<full hex digest>``.  Writes go
to a temp file and are renamed into place, so concurrent writers of the same
bytes converge on one object.  Every read re-hashes the bytes.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from pathlib import Path

from ckledger.errors import IntegrityError, NotFound


def content_id(blob: bytes) -> str:
    return hashlib.sha256(blob).hexdigest()


def _check_cid(cid: str) -> str:
    if len(cid) != 64 or any(c not in "0123456789abcdef" for c in cid):
        raise ValueError(f"not a content id: {cid!r}")
    return cid


class ContentStore:
    def __init__(self, root: str | os.PathLike) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._tmp = self.root / "tmp"
        self._tmp.mkdir(exist_ok=True)

    def path_for(self, cid: str) -> Path:
        _check_cid(cid)
        return self.root / cid[:2] / cid

    def put(self, blob: bytes) -> str:
        cid = content_id(blob)
        path = self.path_for(cid)
        if path.exists():
            return cid
        path.parent.mkdir(exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self._tmp)
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(blob)
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        return cid

    def get(self, cid: str) -> bytes:
        path = self.path_for(cid)
        try:
            blob = path.read_bytes()
        except FileNotFoundError:
            raise NotFound(f"no object {cid}") from None
        if content_id(blob) != cid:
            raise IntegrityError(f"object {cid} does not match its digest")
        return blob

    def __contains__(self, cid: str) -> bool:
        return self.path_for(cid).exists()

    def stats(self) -> tuple[int, int]:
        """``(object count, total bytes)`` over stored objects."""
        count = total = 0
        for sub in self.root.iterdir():
            if len(sub.name) != 2 or not sub.is_dir():
                continue
            for obj in sub.iterdir():
                count += 1
                total += obj.stat().st_size
        return count, total
