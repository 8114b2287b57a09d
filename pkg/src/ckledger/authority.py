"""Attribute key issuance, revocation and epoch rollover.

Every issued key carries exactly one ``epoch=t`` token for the epoch it was
issued in.  Revocation only marks a principal; it bites at the next rollover,
when non-revoked principals are reissued for ``t + 1`` and revoked ones are
skipped.  Ciphertext keys published for ``t + 1`` are then out of reach for
them (forward revocation; plaintext already seen stays seen).

The authority holds the master secret and can therefore decrypt anything.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ckledger.abe.types import UserAttributeKey
from ckledger.errors import AuthorityError
from ckledger.policy import EPOCH, Attribute, epoch_attribute


@dataclass
class EpochState:
    current_epoch: int = 0
    revoked: set[str] = field(default_factory=set)
    enrolled: dict[str, frozenset[Attribute]] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "epoch": self.current_epoch,
                "enrolled": {p: sorted(str(a) for a in attrs) for p, attrs in sorted(self.enrolled.items())},
                "revoked": sorted(self.revoked),
            },
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "EpochState":
        data = json.loads(text)
        state = cls(
            current_epoch=int(data["epoch"]),
            revoked=set(data["revoked"]),
            enrolled={p: frozenset(Attribute.parse(a) for a in attrs) for p, attrs in data["enrolled"].items()},
        )
        if not state.revoked <= set(state.enrolled):
            raise AuthorityError("snapshot revokes principals that are not enrolled")
        return state


class Authority:
    def __init__(self, backend, state: EpochState | None = None) -> None:
        self.backend = backend
        self.state = state if state is not None else EpochState()
        self.keys: dict[str, UserAttributeKey] = {}

    @property
    def epoch(self) -> int:
        return self.state.current_epoch

    def _issue(self, principal: str) -> UserAttributeKey:
        attrs = set(self.state.enrolled[principal]) | {epoch_attribute(self.epoch)}
        key = self.backend.keygen(principal, attrs)
        self.keys[principal] = key
        return key

    def enroll(self, principal: str, attrs) -> UserAttributeKey:
        attrs = frozenset(attrs)
        if principal in self.state.enrolled:
            raise AuthorityError(f"{principal} is already enrolled")
        if not attrs:
            raise AuthorityError("enrollment needs at least one attribute")
        if any(a.name == EPOCH for a in attrs):
            raise AuthorityError("epoch attributes are issued by the authority, not requested")
        self.state.enrolled[principal] = attrs
        return self._issue(principal)

    def key_for(self, principal: str) -> UserAttributeKey:
        """Most recent key issued to ``principal`` in this session, reissuing if unknown."""
        if principal not in self.state.enrolled:
            raise AuthorityError(f"unknown principal {principal}")
        if principal not in self.keys:
            if principal in self.state.revoked:
                raise AuthorityError(f"{principal} is revoked; no current key")
            self._issue(principal)
        return self.keys[principal]

    def revoke(self, principal: str) -> EpochState:
        if principal not in self.state.enrolled:
            raise AuthorityError(f"unknown principal {principal}")
        self.state.revoked.add(principal)
        return self.state

    def reinstate(self, principal: str) -> EpochState:
        """Undo a revocation; effective from the next rollover."""
        if principal not in self.state.enrolled:
            raise AuthorityError(f"unknown principal {principal}")
        self.state.revoked.discard(principal)
        return self.state

    def rollover(self) -> tuple[int, dict[str, UserAttributeKey]]:
        self.state.current_epoch += 1
        reissued = {}
        for principal in sorted(self.state.enrolled):
            if principal in self.state.revoked:
                continue
            reissued[principal] = self._issue(principal)
        return self.epoch, reissued

    def save(self, path: str | os.PathLike) -> None:
        Path(path).write_text(self.state.to_json() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | os.PathLike, backend) -> "Authority":
        return cls(backend, EpochState.from_json(Path(path).read_text(encoding="utf-8")))
