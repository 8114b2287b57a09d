"""Load calibration constants and assemble per-experiment cost profiles.

Every constant lives in ``calibration.json`` with its origin; experiment code
refers to keys, never to literal numbers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ckledger.metering import CostProfile
from ckledger.policy import PolicyForm

ORIGINS = ("reported", "derived", "assumed")
TABLE_SHAPES = [(PolicyForm.AND, 3), (PolicyForm.AND, 6), (PolicyForm.AND_OF_OR, 3), (PolicyForm.AND_OF_OR, 6)]


@dataclass(frozen=True)
class Constant:
    key: str
    value: float
    origin: str
    note: str


class Calibration:
    def __init__(self, entries: dict[str, Constant]) -> None:
        self.entries = entries

    @classmethod
    def load(cls, path: str | Path | None = None) -> "Calibration":
        if path is None:
            text = resources.files("ckledger.bench").joinpath("calibration.json").read_text("utf-8")
        else:
            text = Path(path).read_text(encoding="utf-8")
        raw = json.loads(text)["entries"]
        entries = {}
        for key, item in raw.items():
            if item["origin"] not in ORIGINS:
                raise ValueError(f"{key}: unknown origin {item['origin']!r}")
            if item["value"] < 0:
                raise ValueError(f"{key}: negative constant")
            entries[key] = Constant(key, float(item["value"]), item["origin"], item.get("note", ""))
        return cls(entries)

    def __getitem__(self, key: str) -> float:
        return self.entries[key].value

    def shape_table(self, prefix: str) -> dict[tuple[PolicyForm, int], float]:
        return {(f, k): self[f"{prefix}.{f.value}.{k}"] for f, k in TABLE_SHAPES}

    def pipeline(self) -> CostProfile:
        """Store and retrieve stages priced from the end-to-end breakdown.

        The non-crypto remainder of each end-to-end figure is split between
        the content store and the ledger by the configured fractions.
        """
        enc = self.shape_table("store.abe_encrypt")
        dec = self.shape_table("retrieve.abe_decrypt")
        store = self.shape_table("store.e2e")
        retrieve = self.shape_table("retrieve.e2e")
        seal, open_ = self["aes.seal_per_mib"], self["aes.open_per_mib"]
        put_share = self["split.store.cas_put_fraction"]
        read_share = self["split.retrieve.ledger_read_fraction"]
        store_rest = {s: store[s] - enc[s] - seal for s in TABLE_SHAPES}
        retrieve_rest = {s: retrieve[s] - dec[s] - open_ for s in TABLE_SHAPES}
        return CostProfile(
            by_shape={
                "abe_encrypt": enc,
                "abe_decrypt": dec,
                "cas_put": {s: v * put_share for s, v in store_rest.items()},
                "ledger_append": {s: v * (1 - put_share) for s, v in store_rest.items()},
                "ledger_read": {s: v * read_share for s, v in retrieve_rest.items()},
                "cas_get": {s: v * (1 - read_share) for s, v in retrieve_rest.items()},
            },
            per_mib={"aes_seal": seal, "aes_open": open_},
        )

    def rekey(self) -> CostProfile:
        return self.pipeline().override(abe_encrypt=self["rekey.ck_update"], key_recover=0.0)

    def gateway(self) -> CostProfile:
        return self.pipeline().override(
            abe_decrypt=self["gateway.client_abe_decrypt"],
            gateway_transform=self["gateway.transform"],
            finish=self["gateway.finish"],
        )

    def baseline(self) -> CostProfile:
        return self.pipeline().override(
            ledger_read=self["baseline.ledger_read"],
            abe_decrypt=self["baseline.abe_decrypt"],
            key_server=self["baseline.key_server"],
        )

    def casestudy(self) -> CostProfile:
        return self.pipeline().override(abe_encrypt=self["casestudy.ck_update"], key_recover=0.0)

    def batching(self) -> CostProfile:
        return CostProfile(
            fixed={"ledger_batch_append": self["batching.append_overhead"]},
            per_item={"ledger_batch_append": self["batching.per_record"]},
        )
