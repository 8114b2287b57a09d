"""Store, retrieve, ciphertext-key rotation and gateway-assisted retrieval.

A stored object is sealed under a fresh data key, the key is encapsulated
under ``base_policy AND epoch=t``, the sealed bytes go to the content store
and one metadata record goes to the ledger (last, so a failed put leaves no
record).  Rotation re-encapsulates the same data key under a newer epoch and
appends a new record; payload bytes and CIDs never change.
"""

from __future__ import annotations

import base64
import json
import math
import os
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Protocol, Sequence

from ckledger import envelope
from ckledger.abe import reference
from ckledger.abe.types import CiphertextKey, RetrievalSecret, TransformKey, UserAttributeKey
from ckledger.cas import ContentStore
from ckledger.errors import NotFound, PlanError, Unauthorized
from ckledger.ledger import Ledger, MetadataRecord
from ckledger.metering import Meter, Span
from ckledger.policy import Attribute, Node, attach_epoch, parse, policy_id, satisfies, shape, strip_epoch

STORE_STAGES = ("aes_seal", "abe_encrypt", "cas_put", "ledger_append")
RETRIEVE_STAGES = ("ledger_read", "cas_get", "abe_decrypt", "aes_open")


@dataclass(frozen=True)
class StoreReceipt:
    cid: str
    record: MetadataRecord
    timing: dict[str, float]  # ms per stage
    total_ms: float


@dataclass(frozen=True)
class Retrieval:
    plaintext: bytes
    timing: dict[str, float]
    total_ms: float


@dataclass(frozen=True)
class GatewayRetrieval:
    plaintext: bytes
    client_ms: float
    gateway_ms: float
    timing: dict[str, float]
    total_ms: float


@dataclass(frozen=True)
class RotationBatch:
    records: tuple[MetadataRecord, ...]
    crypto_ms: tuple[float, ...]  # per update: key recovery + re-encapsulation
    append_ms: float


# --------------------------------------------------------------------------
# data-key recovery for rotation


class KeySource(Protocol):
    def recover(self, record: MetadataRecord) -> bytes: ...


class OwnerKeystore:
    """Owner-held map from CID to data key, optionally persisted as JSON."""

    def __init__(self, path: str | os.PathLike | None = None) -> None:
        self.path = Path(path) if path is not None else None
        self._keys: dict[str, bytes] = {}
        if self.path is not None and self.path.exists():
            raw = json.loads(self.path.read_text(encoding="utf-8"))
            self._keys = {cid: base64.b64decode(k) for cid, k in raw.items()}

    def remember(self, cid: str, key: bytes) -> None:
        self._keys[cid] = key
        if self.path is not None:
            payload = {c: base64.b64encode(k).decode("ascii") for c, k in sorted(self._keys.items())}
            tmp = self.path.with_suffix(".tmp")
            tmp.write_text(json.dumps(payload, indent=1), encoding="utf-8")
            os.chmod(tmp, 0o600)
            os.replace(tmp, self.path)

    def recover(self, record: MetadataRecord) -> bytes:
        try:
            return self._keys[record.cid]
        except KeyError:
            raise NotFound(f"owner keystore has no key for {record.cid}") from None

    def __contains__(self, cid: str) -> bool:
        return cid in self._keys

    def __len__(self) -> int:
        return len(self._keys)


class DelegatedRekeyer:
    """Rekey service that recovers data keys by decrypting the current CK.

    The service principal must be enrolled with attributes that satisfy the
    protected policies and must keep receiving epoch reissues.
    """

    def __init__(self, backend, service_key: UserAttributeKey) -> None:
        self.backend = backend
        self.service_key = service_key

    def recover(self, record: MetadataRecord) -> bytes:
        return self.backend.decrypt(self.service_key, CiphertextKey.from_bytes(record.ck))


# --------------------------------------------------------------------------
# rekey plans


class Strategy(str, Enum):
    NAIVE = "NAIVE"
    EPOCH = "EPOCH"


def epoch_count(window_s: float, epoch_len_s: float) -> int:
    if epoch_len_s <= 0:
        raise PlanError("epoch length must be positive")
    return math.ceil(window_s / epoch_len_s)


@dataclass(frozen=True)
class RekeyPlan:
    strategy: Strategy
    window_s: float
    assets: tuple[str, ...]
    revocation_events: tuple[float, ...] = ()
    epoch_len_s: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        object.__setattr__(self, "assets", tuple(self.assets))
        object.__setattr__(self, "revocation_events", tuple(sorted(self.revocation_events)))
        if self.window_s <= 0:
            raise PlanError("window must be positive")
        if self.strategy is Strategy.EPOCH and (self.epoch_len_s is None or self.epoch_len_s <= 0):
            raise PlanError("epoch strategy needs a positive epoch length")
        if any(t < 0 or t > self.window_s for t in self.revocation_events):
            raise PlanError("revocation events must fall inside the window")

    @property
    def M(self) -> int:
        return len(self.assets)

    @property
    def R(self) -> int:
        return len(self.revocation_events)

    @property
    def E(self) -> int:
        assert self.epoch_len_s is not None
        return epoch_count(self.window_s, self.epoch_len_s)

    @property
    def rounds(self) -> int:
        return self.R if self.strategy is Strategy.NAIVE else self.E

    @property
    def update_count(self) -> int:
        return self.M * self.rounds


@dataclass(frozen=True)
class RekeyOutcome:
    update_count: int
    total_crypto_cost_s: float
    rounds: int


# --------------------------------------------------------------------------
# pipeline


class Workflow:
    def __init__(
        self,
        backend,
        cas: ContentStore,
        ledger: Ledger,
        *,
        meter: Meter | None = None,
        keystore: OwnerKeystore | None = None,
        key_source: KeySource | None = None,
    ) -> None:
        self.backend = backend
        self.cas = cas
        self.ledger = ledger
        self.meter = meter if meter is not None else Meter()
        self.keystore = keystore if keystore is not None else OwnerKeystore()
        self.key_source: KeySource = key_source if key_source is not None else self.keystore

    def store(self, owner: str, data: bytes, base_policy: Node, epoch: int) -> StoreReceipt:
        policy = attach_epoch(base_policy, epoch)
        pshape = shape(policy)
        span = self.meter.span()
        with span.stage("aes_seal", shape=pshape, size=len(data)):
            key, sealed = envelope.seal(data)
        with span.stage("abe_encrypt", shape=pshape):
            ck = self.backend.encrypt(policy, key)
        blob = sealed.to_bytes()
        with span.stage("cas_put", shape=pshape, size=len(blob)):
            cid = self.cas.put(blob)
        record = MetadataRecord(cid, ck.to_bytes(), policy_id(base_policy), epoch, owner, self.meter.now_us())
        with span.stage("ledger_append", shape=pshape):
            self.ledger.append([record])
        self.keystore.remember(cid, key)
        return StoreReceipt(cid, record, dict(span.stages), span.close())

    def _latest(self, span: Span, cid: str) -> tuple[MetadataRecord, CiphertextKey]:
        with span.stage("ledger_read") as info:
            record = self.ledger.latest_ck(cid)
            ck = CiphertextKey.from_bytes(record.ck)
            info.shape = shape(parse(ck.policy_text))
        return record, ck

    def retrieve(self, uk: UserAttributeKey, cid: str, *, slowdown: float = 1.0) -> Retrieval:
        span = self.meter.span()
        record, ck = self._latest(span, cid)
        pshape = shape(parse(ck.policy_text))
        with span.stage("cas_get", shape=pshape):
            blob = self.cas.get(cid)
        with span.stage("abe_decrypt", shape=pshape, slowdown=slowdown):
            key = self.backend.decrypt(uk, ck)
        with span.stage("aes_open", shape=pshape, size=len(blob), slowdown=slowdown):
            plaintext = envelope.open_sealed(key, blob)
        return Retrieval(plaintext, dict(span.stages), span.close())

    def obtain_key(self, uk: UserAttributeKey, cid: str) -> tuple[bytes, float]:
        """Client path to a usable data key: ledger read plus decapsulation."""
        span = self.meter.span()
        _, ck = self._latest(span, cid)
        with span.stage("abe_decrypt", shape=shape(parse(ck.policy_text))):
            key = self.backend.decrypt(uk, ck)
        return key, span.close()

    def rotate_many(
        self,
        cids: Sequence[str],
        new_epoch: int | None = None,
        base_policies: dict[str, Node] | None = None,
    ) -> RotationBatch:
        """Re-encapsulate each CID's data key and append all records as one batch.

        ``new_epoch`` defaults to one past each CID's latest epoch.
        """
        if not cids:
            raise PlanError("nothing to rotate")
        records = []
        crypto = []
        for cid in cids:
            latest = self.ledger.latest_ck(cid)
            base = (base_policies or {}).get(cid)
            if base is None:
                base = strip_epoch(parse(CiphertextKey.from_bytes(latest.ck).policy_text))
            epoch = latest.epoch + 1 if new_epoch is None else new_epoch
            if epoch < latest.epoch:
                raise PlanError(f"{cid} is already at epoch {latest.epoch}")
            policy = attach_epoch(base, epoch)
            span = self.meter.span()
            with span.stage("key_recover"):
                key = self.key_source.recover(latest)
            with span.stage("abe_encrypt", shape=shape(policy)):
                ck = self.backend.encrypt(policy, key)
            crypto.append(span.close())
            records.append(
                MetadataRecord(cid, ck.to_bytes(), policy_id(base), epoch, latest.owner_id, self.meter.now_us())
            )
        span = self.meter.span()
        with span.stage("ledger_append", shape=shape(policy)):
            self.ledger.append(records)
        return RotationBatch(tuple(records), tuple(crypto), span.close())

    def rotate_ck(self, cid: str, base_policy: Node | None = None, new_epoch: int | None = None) -> MetadataRecord:
        if cid not in self.ledger:
            raise NotFound(f"no ledger record for {cid}")
        bases = {cid: base_policy} if base_policy is not None else None
        return self.rotate_many([cid], new_epoch, bases).records[0]

    def execute_rekey(self, plan: RekeyPlan) -> RekeyOutcome:
        """Naive: rotate every asset at each revocation.  Epoch: at each boundary."""
        missing = [cid for cid in plan.assets if cid not in self.ledger]
        if missing:
            raise PlanError(f"{len(missing)} plan assets have no ledger record")
        total_ms = 0.0
        updates = 0
        for _ in range(plan.rounds):
            if not plan.assets:
                break
            batch = self.rotate_many(plan.assets)
            total_ms += sum(batch.crypto_ms)
            updates += len(batch.records)
        return RekeyOutcome(updates, total_ms / 1000.0, plan.rounds)

    def gateway_retrieve(
        self,
        tk: TransformKey,
        ek: RetrievalSecret,
        cid: str,
        client_slowdown: float = 1.0,
        gateway=reference,
    ) -> GatewayRetrieval:
        """Gateway rebuilds and rewraps the data key; the client only unwraps.

        Only client-side crypto (``finish``, ``aes_open``) is slowed.
        """
        span = self.meter.span()
        _, ck = self._latest(span, cid)
        pshape = shape(parse(ck.policy_text))
        with span.stage("cas_get", shape=pshape):
            blob = self.cas.get(cid)
        with span.stage("gateway_transform", shape=pshape):
            partial = gateway.transform(tk, ck, ek)
        with span.stage("finish", slowdown=client_slowdown):
            key = gateway.finish(ek, partial)
        with span.stage("aes_open", shape=pshape, size=len(blob), slowdown=client_slowdown):
            plaintext = envelope.open_sealed(key, blob)
        stages = dict(span.stages)
        client = stages["finish"] + stages["aes_open"]
        return GatewayRetrieval(plaintext, client, stages["gateway_transform"], stages, span.close())


class OnlineKeyServer:
    """Baseline: a trusted server checks the policy and hands back the data key.

    In calibrated runs each request is charged the ``key_server`` stage, which
    stands for the authenticated round trip; measured runs time the in-process
    path only.
    """

    def __init__(self, meter: Meter | None = None) -> None:
        self.meter = meter if meter is not None else Meter()
        self._keys: dict[str, tuple[bytes, Node]] = {}
        self._principals: dict[str, frozenset[Attribute]] = {}

    def register(self, cid: str, key: bytes, policy: Node) -> None:
        self._keys[cid] = (key, policy)

    def enroll(self, principal: str, attrs: Iterable[Attribute]) -> None:
        self._principals[principal] = frozenset(attrs)

    def timed_request(self, principal: str, cid: str) -> tuple[bytes, float]:
        span = self.meter.span()
        with span.stage("key_server"):
            entry = self._keys.get(cid)
            if entry is None:
                raise NotFound(f"key server has no key for {cid}")
            key, policy = entry
            if not satisfies(policy, self._principals.get(principal, frozenset())):
                raise Unauthorized(f"{principal} does not satisfy the policy for {cid}")
        return key, span.close()

    def request(self, principal: str, cid: str) -> bytes:
        return self.timed_request(principal, cid)[0]


def online_key_server_request(server: OnlineKeyServer, principal: str, cid: str) -> bytes:
    return server.request(principal, cid)
