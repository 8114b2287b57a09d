"""Closed-form operating cost of publication, reads and rekeying."""

from __future__ import annotations

from dataclasses import dataclass

from ckledger.bench.calibration import Calibration
from ckledger.errors import PlanError
from ckledger.metering import MIB
from ckledger.policy import PolicyForm
from ckledger.workflow import epoch_count


@dataclass(frozen=True)
class CostModelParams:
    """Workload and per-operation costs (ms) for :func:`predict_cost`.

    ``M`` assets, ``N`` consumers, policies of ``policy_size_k`` leaves, an
    observation window of ``T_s`` seconds cut into epochs of ``L_s`` seconds,
    and ``R`` revocation events inside the window.
    """

    M: int
    N: int
    policy_size_k: int
    T_s: float
    L_s: float
    R: int
    abe_enc_ms: float = 0.0
    abe_dec_ms: float = 0.0
    aes_ms: float = 0.0
    ledger_write_ms: float = 0.0
    ledger_read_ms: float = 0.0
    cas_fetch_ms: float = 0.0
    ck_update_ms: float = 0.0

    def __post_init__(self) -> None:
        if self.L_s <= 0:
            raise PlanError("epoch length L_s must be positive")
        for name, value in vars(self).items():
            if value < 0:
                raise PlanError(f"{name} must be nonnegative")

    @property
    def E(self) -> int:
        return epoch_count(self.T_s, self.L_s)

    @classmethod
    def calibrated(
        cls,
        cal: Calibration,
        *,
        form: PolicyForm = PolicyForm.AND_OF_OR,
        k: int = 6,
        size: int = MIB,
        **workload,
    ) -> "CostModelParams":
        profile = cal.pipeline()
        shape = (PolicyForm(form), k)
        return cls(
            policy_size_k=k,
            abe_enc_ms=profile.stage_ms("abe_encrypt", shape),
            abe_dec_ms=profile.stage_ms("abe_decrypt", shape),
            aes_ms=profile.stage_ms("aes_open", shape, size),
            ledger_write_ms=profile.stage_ms("ledger_append", shape),
            ledger_read_ms=profile.stage_ms("ledger_read", shape),
            cas_fetch_ms=profile.stage_ms("cas_get", shape),
            ck_update_ms=cal["rekey.ck_update"],
            **workload,
        )


@dataclass(frozen=True)
class CostPrediction:
    publish_cost_s: float
    read_cost_ms: float
    naive_updates: int
    epoch_updates: int
    naive_rekey_cost_s: float
    epoch_rekey_cost_s: float
    ratio: float


def predict_cost(params: CostModelParams) -> CostPrediction:
    """Publishing is one encapsulation plus one ledger write per asset; each
    read is a ledger read, a fetch, a decapsulation and a payload open.
    Naive rekeying does ``M * R`` updates, epoch rekeying ``M * E``.
    """
    p = params
    naive = p.M * p.R
    epoch = p.M * p.E
    return CostPrediction(
        publish_cost_s=p.M * (p.abe_enc_ms + p.ledger_write_ms) / 1000.0,
        read_cost_ms=p.ledger_read_ms + p.cas_fetch_ms + p.abe_dec_ms + p.aes_ms,
        naive_updates=naive,
        epoch_updates=epoch,
        naive_rekey_cost_s=naive * p.ck_update_ms / 1000.0,
        epoch_rekey_cost_s=epoch * p.ck_update_ms / 1000.0,
        ratio=p.R / p.E,
    )
