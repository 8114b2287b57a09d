"""Hash-chained append-only metadata log.

The log is a single segment file: an 8-byte header followed by one
length-prefixed entry per append.  An entry body is::

    seq (u64) | prev_hash (32) | count (u32) | (len u32 | record)* | entry_hash (32)

with ``entry_hash = SHA-256(prev_hash || seq || count || (len | record)*)``
and the genesis ``prev_hash`` all zeros.  A batch of records shares one
entry.  An in-memory index from CID to record locations is rebuilt on open;
record bytes are always read back from the file.
"""

from __future__ import annotations

import hashlib
import os
import struct
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

from ckledger.errors import LedgerError, NotFound

HEADER = b"CKLEDGR\x01"
GENESIS = bytes(32)
LEDGER_FILE = "ledger.seg"


@dataclass(frozen=True)
class MetadataRecord:
    cid: str
    ck: bytes
    policy_id: str
    epoch: int
    owner_id: str
    timestamp: int  # microseconds since the Unix epoch

    def __post_init__(self) -> None:
        for name in ("cid", "policy_id"):
            value = getattr(self, name)
            if len(value) != 64 or value != value.lower():
                raise LedgerError(f"{name} must be 64 lowercase hex chars")
            bytes.fromhex(value)
        if self.epoch < 0 or self.timestamp < 0:
            raise LedgerError("epoch and timestamp must be nonnegative")
        if not self.ck:
            raise LedgerError("record has an empty ciphertext key")

    def to_bytes(self) -> bytes:
        owner = self.owner_id.encode("utf-8")
        return b"".join(
            [
                bytes.fromhex(self.cid),
                bytes.fromhex(self.policy_id),
                struct.pack(">QQH", self.epoch, self.timestamp, len(owner)),
                owner,
                struct.pack(">I", len(self.ck)),
                self.ck,
            ]
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "MetadataRecord":
        try:
            cid, pid = data[:32].hex(), data[32:64].hex()
            epoch, ts, olen = struct.unpack(">QQH", data[64:82])
            owner = data[82 : 82 + olen].decode("utf-8")
            (cklen,) = struct.unpack(">I", data[82 + olen : 86 + olen])
            ck = data[86 + olen :]
        except (struct.error, UnicodeDecodeError) as exc:
            raise LedgerError(f"malformed record: {exc}") from None
        if len(ck) != cklen:
            raise LedgerError("malformed record: ciphertext key length mismatch")
        return cls(cid, ck, pid, epoch, owner, ts)


@dataclass(frozen=True)
class ChainEntry:
    seq: int
    prev_hash: bytes
    records: tuple[MetadataRecord, ...]
    entry_hash: bytes


@dataclass(frozen=True)
class ChainStatus:
    ok: bool
    entries: int
    first_bad_seq: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class _Loc:
    epoch: int
    seq: int
    position: int
    offset: int
    length: int


class _Corrupt(Exception):
    def __init__(self, seq: int, reason: str) -> None:
        super().__init__(reason)
        self.seq = seq
        self.reason = reason


def _entry_hash(prev: bytes, seq: int, records_blob: bytes) -> bytes:
    return hashlib.sha256(prev + struct.pack(">Q", seq) + records_blob).digest()


def _encode_records(records: Sequence[MetadataRecord]) -> bytes:
    parts = [struct.pack(">I", len(records))]
    for rec in records:
        raw = rec.to_bytes()
        parts.append(struct.pack(">I", len(raw)))
        parts.append(raw)
    return b"".join(parts)


def _scan(data: bytes) -> Iterator[tuple[int, bytes, list[tuple[int, int]], int]]:
    """Yield ``(seq, entry_hash, [(record offset, length)], end offset)`` per entry.

    Raises :class:`_Corrupt` at the first entry that fails structure, seq
    numbering, linkage or hash checks.
    """
    if data[: len(HEADER)] != HEADER:
        raise _Corrupt(0, "bad segment header")
    pos = len(HEADER)
    prev = GENESIS
    expected = 0
    while pos < len(data):
        if pos + 4 > len(data):
            raise _Corrupt(expected, "truncated length prefix")
        (body_len,) = struct.unpack_from(">I", data, pos)
        start = pos + 4
        end = start + body_len
        if end > len(data) or body_len < 8 + 32 + 4 + 32:
            raise _Corrupt(expected, "truncated entry")
        seq, = struct.unpack_from(">Q", data, start)
        prev_hash = data[start + 8 : start + 40]
        rec_start = start + 40
        stored_hash = data[end - 32 : end]
        (count,) = struct.unpack_from(">I", data, rec_start)
        cursor = rec_start + 4
        locs = []
        for _ in range(count):
            if cursor + 4 > end - 32:
                raise _Corrupt(expected, "record table overruns entry")
            (rlen,) = struct.unpack_from(">I", data, cursor)
            cursor += 4
            if cursor + rlen > end - 32:
                raise _Corrupt(expected, "record table overruns entry")
            locs.append((cursor, rlen))
            cursor += rlen
        if cursor != end - 32 or count == 0:
            raise _Corrupt(expected, "record table does not fill entry")
        if seq != expected:
            raise _Corrupt(expected, "sequence number out of order")
        if prev_hash != prev:
            raise _Corrupt(expected, "broken link to previous entry")
        if _entry_hash(prev_hash, seq, data[rec_start : end - 32]) != stored_hash:
            raise _Corrupt(expected, "entry hash mismatch")
        yield seq, stored_hash, locs, end
        prev = stored_hash
        expected += 1
        pos = end


class Ledger:
    """Single-writer, multi-reader hash-chained metadata log.

    ``fsync`` controls whether each append is forced to stable storage before
    returning; the file is always flushed.
    """

    def __init__(self, root: str | os.PathLike, *, fsync: bool = True) -> None:
        root = Path(root)
        root.mkdir(parents=True, exist_ok=True)
        self.path = root / LEDGER_FILE
        self.fsync = fsync
        self._lock = threading.Lock()
        if not self.path.exists() or self.path.stat().st_size == 0:
            with open(self.path, "wb") as fh:
                fh.write(HEADER)
                fh.flush()
                os.fsync(fh.fileno())
        self._reload()
        self._fd = os.open(self.path, os.O_RDONLY)

    def _reload(self) -> None:
        data = self.path.read_bytes()
        self._index: dict[str, list[_Loc]] = {}
        self._entries = 0
        self._records = 0
        self._prev = GENESIS
        self._end = len(HEADER)
        self.corrupt_at: int | None = None
        try:
            for seq, entry_hash, locs, end in _scan(data):
                for position, (offset, length) in enumerate(locs):
                    rec = MetadataRecord.from_bytes(data[offset : offset + length])
                    self._index.setdefault(rec.cid, []).append(
                        _Loc(rec.epoch, seq, position, offset, length)
                    )
                self._entries += 1
                self._records += len(locs)
                self._prev = entry_hash
                self._end = end
        except (_Corrupt, LedgerError) as exc:
            self.corrupt_at = getattr(exc, "seq", self._entries)

    def close(self) -> None:
        os.close(self._fd)

    def __enter__(self) -> "Ledger":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def append(self, records: Sequence[MetadataRecord]) -> ChainEntry:
        records = tuple(records)
        if not records:
            raise LedgerError("cannot append an empty batch")
        with self._lock:
            if self.corrupt_at is not None:
                raise LedgerError(f"ledger is corrupt at entry {self.corrupt_at}; refusing to append")
            seq = self._entries
            records_blob = _encode_records(records)
            entry_hash = _entry_hash(self._prev, seq, records_blob)
            body = struct.pack(">Q", seq) + self._prev + records_blob + entry_hash
            frame = struct.pack(">I", len(body)) + body
            with open(self.path, "r+b") as fh:
                fh.seek(self._end)
                fh.write(frame)
                fh.truncate()
                fh.flush()
                if self.fsync:
                    os.fsync(fh.fileno())
            cursor = self._end + 4 + 8 + 32 + 4
            for position, rec in enumerate(records):
                length = len(rec.to_bytes())
                cursor += 4
                self._index.setdefault(rec.cid, []).append(
                    _Loc(rec.epoch, seq, position, cursor, length)
                )
                cursor += length
            entry = ChainEntry(seq, self._prev, records, entry_hash)
            self._end += len(frame)
            self._prev = entry_hash
            self._entries += 1
            self._records += len(records)
            return entry

    def verify_chain(self) -> ChainStatus:
        """Re-read the segment and check every hash and link from genesis."""
        data = self.path.read_bytes()
        count = 0
        try:
            for _ in _scan(data):
                count += 1
        except _Corrupt as exc:
            return ChainStatus(False, count, exc.seq, exc.reason)
        return ChainStatus(True, count)

    def _read(self, loc: _Loc) -> MetadataRecord:
        return MetadataRecord.from_bytes(os.pread(self._fd, loc.length, loc.offset))

    def latest_ck(self, cid: str) -> MetadataRecord:
        """Record for ``cid`` with the highest epoch; the later append wins ties."""
        locs = self._index.get(cid)
        if not locs:
            raise NotFound(f"no ledger record for {cid}")
        best = max(locs, key=lambda loc: (loc.epoch, loc.seq, loc.position))
        return self._read(best)

    def history(self, cid: str) -> list[MetadataRecord]:
        return [self._read(loc) for loc in self._index.get(cid, [])]

    def __contains__(self, cid: str) -> bool:
        return cid in self._index

    def cids(self) -> list[str]:
        return list(self._index)

    def entries(self) -> Iterator[ChainEntry]:
        data = self.path.read_bytes()
        prev = GENESIS
        for seq, entry_hash, locs, _ in _scan(data):
            recs = tuple(MetadataRecord.from_bytes(data[o : o + n]) for o, n in locs)
            yield ChainEntry(seq, prev, recs, entry_hash)
            prev = entry_hash

    def size_bytes(self) -> int:
        return os.path.getsize(self.path)

    def record_count(self) -> int:
        return self._records

    def entry_count(self) -> int:
        return self._entries
