import hashlib
import os
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ckledger.cas import ContentStore, content_id
from ckledger.errors import IntegrityError, NotFound


def test_layout_and_digest(tmp_path):
    store = ContentStore(tmp_path)
    cid = store.put(b"hello")
    assert cid == hashlib.sha256(b"hello").hexdigest()
    assert (tmp_path / cid[:2] / cid).read_bytes() == b"hello"
    assert cid in store


def test_round_trip_and_dedup_1000_blobs(tmp_path):
    rng = __import__("random").Random(5)
    store = ContentStore(tmp_path)
    blobs = [rng.randbytes(rng.randrange(0, 2048)) for _ in range(1000)]
    blobs += blobs[:100]  # exact duplicates
    cids = [store.put(b) for b in blobs]
    for b, cid in zip(blobs, cids):
        assert store.get(cid) == b
        assert cid == content_id(b)
    assert store.stats()[0] == len(set(blobs))
    assert store.stats()[1] == sum(len(b) for b in set(blobs))


@settings(max_examples=50)
@given(st.lists(st.binary(max_size=512), max_size=20))
def test_put_is_idempotent(tmp_path_factory, blobs):
    store = ContentStore(tmp_path_factory.mktemp("cas"))
    first = [store.put(b) for b in blobs]
    second = [store.put(b) for b in blobs]
    assert first == second
    assert store.stats()[0] == len(set(blobs))


def test_missing_object(tmp_path):
    with pytest.raises(NotFound):
        ContentStore(tmp_path).get("0" * 64)


def test_bad_cid_rejected(tmp_path):
    with pytest.raises(ValueError):
        ContentStore(tmp_path).get("../etc/passwd")


def test_corruption_detected_on_read(tmp_path):
    store = ContentStore(tmp_path)
    cid = store.put(b"original bytes")
    store.path_for(cid).write_bytes(b"original bytez")
    with pytest.raises(IntegrityError):
        store.get(cid)


def test_concurrent_writers_converge(tmp_path):
    store = ContentStore(tmp_path)
    blob = os.urandom(4096)
    out = []
    threads = [threading.Thread(target=lambda: out.append(store.put(blob))) for _ in range(16)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(set(out)) == 1
    assert store.stats() == (1, 4096)
    assert not list((tmp_path / "tmp").iterdir())
