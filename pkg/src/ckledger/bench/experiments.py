"""Experiment runners.

Each runner builds a throwaway workspace (content store, ledger, reference
backend), drives the workflow and returns an :class:`ExperimentResult`.  In
calibrated mode stage durations come from the calibration profiles and the
clock is virtual, so output is identical across machines and runs for a
fixed seed.  The real cryptography and storage still execute in both modes.
"""

from __future__ import annotations

import hashlib
import math
import random
import shutil
import statistics
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Sequence

from ckledger.abe.reference import ReferenceBackend, setup, transform_keygen
from ckledger.authority import Authority
from ckledger.bench.calibration import Calibration
from ckledger.bench.costmodel import CostModelParams, predict_cost
from ckledger.cas import ContentStore
from ckledger.errors import NotSatisfied
from ckledger.ledger import Ledger, MetadataRecord
from ckledger.metering import MIB, CostProfile, Meter, Mode, summarize
from ckledger.policy import (
    AND,
    OR,
    Attribute,
    PolicyForm,
    a_satisfying_set,
    attach_epoch,
    canonicalize,
    epoch_attribute,
    gen_policy,
    leaf,
    policy_id,
    satisfies,
)
from ckledger.workflow import OnlineKeyServer, RekeyPlan, Strategy, Workflow

KB = 1024
EXP1_SIZES = (1 * KB, 10 * KB, MIB)
EXP1_POLICIES = (
    (PolicyForm.AND, 3),
    (PolicyForm.AND, 6),
    (PolicyForm.AND_OF_OR, 3),
    (PolicyForm.AND_OF_OR, 6),
)
CASE_PRINCIPALS = {
    "alice_admin": ("role=admin", "site=hq"),
    "bob_maint": ("role=maintainer", "site=hq"),
    "carl_r_contract": ("role=contractor", "site=hq"),
    "dana_other": ("role=visitor", "site=plantB"),
}
CASE_REVOKED = "carl_r_contract"


@dataclass
class RunConfig:
    mode: Mode = Mode.CALIBRATED
    seed: int = 42
    fsync: bool = True
    sleep: bool = False
    workdir: Path | None = None
    calibration: Calibration = field(default_factory=Calibration.load)

    def __post_init__(self) -> None:
        self.mode = Mode(self.mode)

    def meter(self, profile: CostProfile) -> Meter:
        if self.mode is Mode.CALIBRATED:
            return Meter(Mode.CALIBRATED, profile, sleep=self.sleep)
        return Meter(Mode.MEASURED)

    def rng(self, *salt: Any) -> random.Random:
        return random.Random("|".join(map(str, (self.seed, *salt))))


@dataclass
class ExperimentResult:
    exp_id: str
    params: dict[str, Any]
    rows: list[dict[str, Any]]
    summary: dict[str, Any]
    series: dict[str, list[dict[str, Any]]] = field(default_factory=dict)
    files: list[str] = field(default_factory=list)


@dataclass
class _Workspace:
    root: Path
    backend: ReferenceBackend
    cas: ContentStore
    ledger: Ledger
    workflow: Workflow


@contextmanager
def _workspace(cfg: RunConfig, meter: Meter, tag: str) -> Iterator[_Workspace]:
    root = Path(tempfile.mkdtemp(prefix=f"ckl-{tag}-", dir=cfg.workdir))
    ledger = Ledger(root / "ledger", fsync=cfg.fsync)
    try:
        backend = ReferenceBackend(setup(cfg.seed))
        cas = ContentStore(root / "cas")
        yield _Workspace(root, backend, cas, ledger, Workflow(backend, cas, ledger, meter=meter))
    finally:
        ledger.close()
        shutil.rmtree(root, ignore_errors=True)


def _stats(prefix: str, samples: Sequence[float]) -> dict[str, float]:
    s = summarize(samples)
    return {f"{prefix}_mean": s["mean"], f"{prefix}_p50": s["p50"], f"{prefix}_p99": s["p99"]}


# --------------------------------------------------------------------------
# 1: store / retrieve breakdown


def run_exp1(
    sizes: Sequence[int] = EXP1_SIZES,
    policies: Sequence[tuple[PolicyForm, int]] = EXP1_POLICIES,
    n_trials: int = 20,
    warmup: int = 2,
    cfg: RunConfig | None = None,
) -> ExperimentResult:
    cfg = cfg or RunConfig()
    meter = cfg.meter(cfg.calibration.pipeline())
    store_stages = ("aes_seal", "abe_encrypt", "cas_put", "ledger_append")
    retrieve_stages = ("ledger_read", "cas_get", "abe_decrypt", "aes_open")
    rows = []
    with _workspace(cfg, meter, "exp1") as ws:
        for size in sizes:
            data = cfg.rng("exp1-data", size).randbytes(size)
            for form, k in policies:
                form = PolicyForm(form)
                base = gen_policy(k, form, cfg.seed)
                uk = ws.backend.keygen("reader", a_satisfying_set(base) | {epoch_attribute(0)})
                samples: dict[str, list[float]] = {n: [] for n in (*store_stages, *retrieve_stages)}
                store_e2e, retrieve_e2e = [], []
                for trial in range(warmup + n_trials):
                    receipt = ws.workflow.store("owner", data, base, 0)
                    got = ws.workflow.retrieve(uk, receipt.cid)
                    if got.plaintext != data:
                        raise AssertionError("round trip mismatch")
                    if trial < warmup:
                        continue
                    for name in store_stages:
                        samples[name].append(receipt.timing[name])
                    for name in retrieve_stages:
                        samples[name].append(got.timing[name])
                    store_e2e.append(receipt.total_ms)
                    retrieve_e2e.append(got.total_ms)
                row: dict[str, Any] = {"size_bytes": size, "form": form.value, "k": k, "n": n_trials}
                for name, values in samples.items():
                    row.update(_stats(f"{name}_ms", values))
                row.update(_stats("store_e2e_ms", store_e2e))
                row.update(_stats("retrieve_e2e_ms", retrieve_e2e))
                row["abe_share_of_store_pct"] = 100.0 * row["abe_encrypt_ms_mean"] / row["store_e2e_ms_mean"]
                row["abe_share_of_retrieve_pct"] = 100.0 * row["abe_decrypt_ms_mean"] / row["retrieve_e2e_ms_mean"]
                rows.append(row)
        chain_ok = ws.ledger.verify_chain().ok

    largest = max(sizes)
    table = [
        {
            "form": r["form"],
            "k": r["k"],
            "abe_enc_ms": r["abe_encrypt_ms_mean"],
            "abe_dec_ms": r["abe_decrypt_ms_mean"],
            "store_e2e_ms": r["store_e2e_ms_mean"],
            "retrieve_e2e_ms": r["retrieve_e2e_ms_mean"],
        }
        for r in rows
        if r["size_bytes"] == largest
    ]
    enc_vs_k = [{"form": r["form"], "k": r["k"], "abe_enc_ms": r["abe_enc_ms"]} for r in table]
    heaviest = max(table, key=lambda r: r["abe_enc_ms"])
    hrow = next(r for r in rows if r["size_bytes"] == largest and r["form"] == heaviest["form"] and r["k"] == heaviest["k"])
    breakdown = [
        {"operation": op, "stage": name, "ms": hrow[f"{name}_ms_mean"]}
        for op, names in (("store", store_stages), ("retrieve", retrieve_stages))
        for name in names
    ]
    return ExperimentResult(
        "exp1",
        {
            "sizes": list(sizes),
            "policies": [[PolicyForm(f).value, k] for f, k in policies],
            "n_trials": n_trials,
            "warmup": warmup,
        },
        rows,
        {"chain_ok": chain_ok, "table": table},
        {"summary_1mib": table, "enc_vs_k": enc_vs_k, "breakdown": breakdown},
    )


# --------------------------------------------------------------------------
# 2: revocation cost under churn


def run_exp2(
    M: int = 200,
    T: float = 180.0,
    churn_levels: Sequence[float] = (0, 1, 2, 5, 10),
    epoch_lengths: Sequence[float] = (10, 60),
    cfg: RunConfig | None = None,
) -> ExperimentResult:
    cfg = cfg or RunConfig()
    cal = cfg.calibration
    meter = cfg.meter(cal.rekey())
    rng = cfg.rng("exp2")
    rows = []
    with _workspace(cfg, meter, "exp2") as ws:
        cids = tuple(
            ws.workflow.store("owner", rng.randbytes(256), gen_policy(6, PolicyForm.AND_OF_OR, cfg.seed + i), 0).cid
            for i in range(M)
        )
        for churn in churn_levels:
            R = round(churn * T / 60.0)
            events = tuple(sorted(rng.uniform(0, T) for _ in range(R)))
            plans = [(RekeyPlan(Strategy.NAIVE, T, cids, events), None)]
            plans += [(RekeyPlan(Strategy.EPOCH, T, cids, events, L), L) for L in epoch_lengths]
            for plan, L in plans:
                outcome = ws.workflow.execute_rekey(plan)
                predicted = predict_cost(
                    CostModelParams(
                        M=M, N=0, policy_size_k=6, T_s=T, L_s=L or T, R=R, ck_update_ms=cal["rekey.ck_update"]
                    )
                )
                naive = plan.strategy is Strategy.NAIVE
                rows.append(
                    {
                        "churn_per_min": churn,
                        "R": R,
                        "strategy": plan.strategy.value.lower(),
                        "epoch_len_s": "" if L is None else L,
                        "E": "" if L is None else plan.E,
                        "update_count": outcome.update_count,
                        "predicted_updates": predicted.naive_updates if naive else predicted.epoch_updates,
                        "crypto_cost_s": outcome.total_crypto_cost_s,
                        "predicted_cost_s": predicted.naive_rekey_cost_s if naive else predicted.epoch_rekey_cost_s,
                    }
                )
        records = ws.ledger.record_count()
        chain_ok = ws.ledger.verify_chain().ok

    series = []
    for churn in churn_levels:
        point: dict[str, Any] = {"churn_per_min": churn}
        for r in rows:
            if r["churn_per_min"] == churn:
                label = "naive_s" if r["strategy"] == "naive" else f"epoch{r['epoch_len_s']:g}_s"
                point[label] = r["crypto_cost_s"]
        series.append(point)
    top = max(churn_levels)
    summary = {
        "chain_ok": chain_ok,
        "ledger_records": records,
        "naive_at_max_churn_s": next(
            r["crypto_cost_s"] for r in rows if r["churn_per_min"] == top and r["strategy"] == "naive"
        ),
        "epoch_totals_s": {
            f"{L:g}": next(r["crypto_cost_s"] for r in rows if r["churn_per_min"] == top and r["epoch_len_s"] == L)
            for L in epoch_lengths
        },
    }
    return ExperimentResult(
        "exp2",
        {"M": M, "T_s": T, "churn_levels": list(churn_levels), "epoch_lengths": list(epoch_lengths)},
        rows,
        summary,
        {"cost": series},
    )


# --------------------------------------------------------------------------
# 3: ledger growth and read latency vs users and assets


def run_exp3(
    N_values: Sequence[int] = (50, 200),
    M_values: Sequence[int] = (50, 200),
    reads_per_user: int = 5,
    k: int = 6,
    workers: int = 1,
    cfg: RunConfig | None = None,
) -> ExperimentResult:
    """Each user reads ``reads_per_user`` assets drawn from those its
    attributes satisfy (any asset when none qualify, which then fails)."""
    cfg = cfg or RunConfig()
    meter = cfg.meter(cfg.calibration.pipeline())
    rows = []
    chain_ok = True
    for M in M_values:
        arng = cfg.rng("exp3-assets", M)
        assets = [(arng.randbytes(KB), gen_policy(k, PolicyForm.AND_OF_OR, arng.randrange(1 << 30))) for _ in range(M)]
        for N in N_values:
            with _workspace(cfg, meter, "exp3") as ws:
                before = ws.ledger.size_bytes()
                cids = [ws.workflow.store(f"owner{i % 8}", data, base, 0).cid for i, (data, base) in enumerate(assets)]
                growth = ws.ledger.size_bytes() - before
                urng = cfg.rng("exp3-users", M, N)
                jobs = []
                for u in range(N):
                    attrs = {Attribute(f"a{j}", f"v{urng.randrange(4)}") for j in range((k + 1) // 2)}
                    uk = ws.backend.keygen(f"user{u}", attrs | {epoch_attribute(0)})
                    eligible = [cid for cid, (_, base) in zip(cids, assets) if satisfies(base, attrs)] or cids
                    jobs += [(uk, urng.choice(eligible)) for _ in range(reads_per_user)]
                outcomes = _run_reads(ws.workflow, jobs, workers if meter.mode is Mode.MEASURED else 1)
                chain_ok &= ws.ledger.verify_chain().ok
                row = {
                    "N": N,
                    "M": M,
                    "records": ws.ledger.record_count(),
                    "ledger_growth_bytes": growth,
                    "reads": len(outcomes),
                    "successes": sum(ok for ok, _ in outcomes),
                }
                row.update(_stats("read_ms", [ms for _, ms in outcomes]))
                rows.append(row)

    series = []
    for M in M_values:
        cell = [r for r in rows if r["M"] == M]
        series.append(
            {
                "M": M,
                "ledger_growth_bytes": statistics.fmean(r["ledger_growth_bytes"] for r in cell),
                "read_p50_ms": statistics.fmean(r["read_ms_p50"] for r in cell),
                "read_p99_ms": statistics.fmean(r["read_ms_p99"] for r in cell),
            }
        )
    summary: dict[str, Any] = {"chain_ok": chain_ok}
    growth = {(r["N"], r["M"]): r["ledger_growth_bytes"] for r in rows}
    lo, hi = min(M_values), max(M_values)
    if lo != hi:
        summary["growth_ratio"] = {str(N): growth[(N, hi)] / growth[(N, lo)] for N in N_values}
    variation = {}
    for M in M_values:
        across = [growth[(N, M)] for N in N_values]
        variation[str(M)] = (max(across) - min(across)) / min(across)
    summary["growth_variation_across_N"] = variation
    return ExperimentResult(
        "exp3",
        {"N": list(N_values), "M": list(M_values), "reads_per_user": reads_per_user, "k": k, "workers": workers},
        rows,
        summary,
        {"scaling": series},
    )


def _run_reads(workflow: Workflow, jobs, workers: int) -> list[tuple[bool, float]]:
    meter = workflow.meter

    def read(job) -> tuple[bool, float]:
        uk, cid = job
        v0, t0 = meter.now_virtual_ms(), time.perf_counter()
        try:
            return True, workflow.retrieve(uk, cid).total_ms
        except NotSatisfied:
            # a denied read still cost the ledger read, fetch and attempt
            if meter.calibrated:
                return False, meter.now_virtual_ms() - v0
            return False, (time.perf_counter() - t0) * 1000.0

    if workers <= 1:
        return [read(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(read, jobs))


# --------------------------------------------------------------------------
# 4: constrained clients, full decryption vs gateway assistance


def run_exp4(
    slowdowns: Sequence[float] = (1, 2, 4),
    n_trials: int = 20,
    k: int = 6,
    cfg: RunConfig | None = None,
) -> ExperimentResult:
    cfg = cfg or RunConfig()
    meter = cfg.meter(cfg.calibration.gateway())
    rows = []
    with _workspace(cfg, meter, "exp4") as ws:
        base = gen_policy(k, PolicyForm.AND_OF_OR, cfg.seed)
        data = cfg.rng("exp4").randbytes(KB)
        cid = ws.workflow.store("owner", data, base, 0).cid
        uk = ws.backend.keygen("device", a_satisfying_set(base) | {epoch_attribute(0)})
        tk, ek = transform_keygen(uk)
        for s in slowdowns:
            full, transform, finish = [], [], []
            for _ in range(n_trials):
                got = ws.workflow.retrieve(uk, cid, slowdown=s)
                assisted = ws.workflow.gateway_retrieve(tk, ek, cid, client_slowdown=s)
                if got.plaintext != data or assisted.plaintext != data:
                    raise AssertionError("round trip mismatch")
                full.append(got.timing["abe_decrypt"])
                transform.append(assisted.timing["gateway_transform"])
                finish.append(assisted.timing["finish"])
            gw = [a + b for a, b in zip(transform, finish)]
            full_p50 = summarize(full)["p50"]
            gw_p50 = summarize(gw)["p50"]
            rows.append(
                {
                    "slowdown": s,
                    "n": n_trials,
                    "full_client_p50_ms": full_p50,
                    "gateway_mode_p50_ms": gw_p50,
                    "gateway_transform_p50_ms": summarize(transform)["p50"],
                    "client_finish_p50_ms": summarize(finish)["p50"],
                    "relief_ratio": full_p50 / gw_p50,
                }
            )
        chain_ok = ws.ledger.verify_chain().ok
    series = [
        {"slowdown": r["slowdown"], "full_client_ms": r["full_client_p50_ms"], "gateway_ms": r["gateway_mode_p50_ms"]}
        for r in rows
    ]
    gw_values = [r["gateway_mode_p50_ms"] for r in rows]
    summary = {
        "chain_ok": chain_ok,
        "relief_at_max_slowdown": rows[-1]["relief_ratio"],
        "gateway_variation": (max(gw_values) - min(gw_values)) / min(gw_values),
    }
    return ExperimentResult(
        "exp4", {"slowdowns": list(slowdowns), "n_trials": n_trials, "k": k}, rows, summary, {"latency": series}
    )


# --------------------------------------------------------------------------
# 5: ledger-mediated key access vs an online key server


def run_exp5(n: int = 50, warmup: int = 5, k: int = 6, cfg: RunConfig | None = None) -> ExperimentResult:
    cfg = cfg or RunConfig()
    meter = cfg.meter(cfg.calibration.baseline())
    with _workspace(cfg, meter, "exp5") as ws:
        base = gen_policy(k, PolicyForm.AND_OF_OR, cfg.seed)
        receipt = ws.workflow.store("owner", cfg.rng("exp5").randbytes(KB), base, 0)
        attrs = a_satisfying_set(base) | {epoch_attribute(0)}
        uk = ws.backend.keygen("reader", attrs)
        server = OnlineKeyServer(meter)
        key = ws.workflow.keystore.recover(receipt.record)
        server.register(receipt.cid, key, attach_epoch(base, 0))
        server.enroll("reader", attrs)
        ledger_ms, online_ms = [], []
        # interleave the two paths so drift hits both equally
        for i in range(warmup + n):
            k1, t1 = ws.workflow.obtain_key(uk, receipt.cid)
            k2, t2 = server.timed_request("reader", receipt.cid)
            if k1 != key or k2 != key:
                raise AssertionError("key mismatch")
            if i >= warmup:
                ledger_ms.append(t1)
                online_ms.append(t2)
        chain_ok = ws.ledger.verify_chain().ok
    rows = []
    for path, samples in (("ledger_ck", ledger_ms), ("online_key_server", online_ms)):
        s = summarize(samples)
        rows.append({"path": path, "backend": "reference", "n": s["n"], "mean_ms": s["mean"], "p50_ms": s["p50"], "p99_ms": s["p99"]})
    return ExperimentResult("exp5", {"n": n, "warmup": warmup, "k": k}, rows, {"chain_ok": chain_ok})


# --------------------------------------------------------------------------
# 6: ledger append batching


def run_exp6(
    batch_sizes: Sequence[int] = (1, 2, 5, 10, 20, 50),
    n_records: int = 1000,
    repeats: int = 5,
    cfg: RunConfig | None = None,
) -> ExperimentResult:
    """Append ``n_records`` to a fresh ledger in batches of each size.

    Each size is run ``repeats`` times, interleaved across sizes so drift in
    storage latency hits every size alike; the median elapsed time is kept.
    """
    cfg = cfg or RunConfig()
    meter = cfg.meter(cfg.calibration.batching())
    backend = ReferenceBackend(setup(cfg.seed))
    base = gen_policy(6, PolicyForm.AND_OF_OR, cfg.seed)
    ck = backend.encrypt(attach_epoch(base, 0), bytes(32)).to_bytes()
    pid = policy_id(base)
    elapsed: dict[int, list[float]] = {b: [] for b in batch_sizes}
    counts: dict[int, set[tuple[int, int, bool]]] = {b: set() for b in batch_sizes}
    for _ in range(repeats):
        for b in batch_sizes:
            ms, entries, records, ok = _batched_run(cfg, meter, ck, pid, b, n_records)
            elapsed[b].append(ms)
            counts[b].add((entries, records, ok))
    rows = []
    for b in batch_sizes:
        (entries, records, ok), *rest = sorted(counts[b])
        ms = statistics.median(elapsed[b])
        rows.append(
            {
                "batch_size": b,
                "records": records,
                "entries": entries,
                "expected_entries": math.ceil(n_records / b),
                "repeats": repeats,
                "elapsed_ms": ms,
                "throughput_rps": n_records / (ms / 1000.0),
                "chain_ok": ok and not rest,
            }
        )
    return ExperimentResult(
        "exp6",
        {"batch_sizes": list(batch_sizes), "n_records": n_records, "repeats": repeats},
        rows,
        {"chain_ok": all(r["chain_ok"] for r in rows)},
        {"throughput": [{"batch_size": r["batch_size"], "throughput_rps": r["throughput_rps"]} for r in rows]},
    )


def _batched_run(cfg: RunConfig, meter: Meter, ck: bytes, pid: str, b: int, n_records: int):
    root = Path(tempfile.mkdtemp(prefix="ckl-exp6-", dir=cfg.workdir))
    ledger = Ledger(root, fsync=cfg.fsync)
    try:
        records = [
            MetadataRecord(hashlib.sha256(f"{cfg.seed}:{i}".encode()).hexdigest(), ck, pid, 0, "sensor", meter.now_us())
            for i in range(n_records)
        ]
        span = meter.span()
        for start in range(0, n_records, b):
            batch = records[start : start + b]
            with span.stage("ledger_batch_append", items=len(batch)):
                ledger.append(batch)
        ms = span.close()
        return ms, ledger.entry_count(), ledger.record_count(), ledger.verify_chain().ok
    finally:
        ledger.close()
        shutil.rmtree(root, ignore_errors=True)


# --------------------------------------------------------------------------
# 7: maintenance-log revocation case study


def case_policy():
    return AND(OR(leaf("role=admin"), leaf("role=maintainer"), leaf("role=contractor")), leaf("site=hq"))


def run_exp7(n_objects: int = 30, cfg: RunConfig | None = None) -> ExperimentResult:
    cfg = cfg or RunConfig()
    meter = cfg.meter(cfg.calibration.casestudy())
    with _workspace(cfg, meter, "exp7") as ws:
        authority = Authority(ws.backend)
        for name in sorted(CASE_PRINCIPALS):
            authority.enroll(name, [Attribute.parse(a) for a in CASE_PRINCIPALS[name]])
        base = case_policy()
        logs = [f"maintenance log {i:03d}: inspection record".encode() for i in range(n_objects)]
        cids = [ws.workflow.store("plant_ops", data, base, authority.epoch).cid for data in logs]

        def attempt(name: str) -> int:
            ok = 0
            for cid, data in zip(cids, logs):
                try:
                    ok += ws.workflow.retrieve(authority.key_for(name), cid).plaintext == data
                except NotSatisfied:
                    pass
            return ok

        before = {name: attempt(name) for name in sorted(CASE_PRINCIPALS)}
        objects_before, bytes_before = ws.cas.stats()
        authority.revoke(CASE_REVOKED)
        new_epoch, _ = authority.rollover()
        batch = ws.workflow.rotate_many(cids, new_epoch=new_epoch, base_policies={c: base for c in cids})
        objects_after, bytes_after = ws.cas.stats()
        after = {name: attempt(name) for name in sorted(CASE_PRINCIPALS)}
        chain_ok = ws.ledger.verify_chain().ok
    rows = [
        {"principal": name, "objects": n_objects, "before_success": before[name], "after_success": after[name]}
        for name in sorted(CASE_PRINCIPALS)
    ]
    summary = {
        "chain_ok": chain_ok,
        "revoked": CASE_REVOKED,
        "new_epoch": new_epoch,
        "ck_updates": len(batch.records),
        "mean_ck_update_ms": statistics.fmean(batch.crypto_ms),
        "cas_objects_before": objects_before,
        "cas_objects_after": objects_after,
        "new_cas_objects": objects_after - objects_before,
        "cas_bytes_unchanged": bytes_before == bytes_after,
    }
    return ExperimentResult("exp7", {"n_objects": n_objects, "policy": canonicalize(base)}, rows, summary)


# --------------------------------------------------------------------------

RUNNERS = {
    "exp1": run_exp1,
    "exp2": run_exp2,
    "exp3": run_exp3,
    "exp4": run_exp4,
    "exp5": run_exp5,
    "exp6": run_exp6,
    "exp7": run_exp7,
}


def run_experiment(exp_id: str, cfg: RunConfig | None = None) -> ExperimentResult:
    try:
        runner = RUNNERS[exp_id]
    except KeyError:
        raise ValueError(f"unknown experiment {exp_id!r}") from None
    return runner(cfg=cfg)


def run_all(cfg: RunConfig | None = None, only: Sequence[str] | None = None) -> list[ExperimentResult]:
    cfg = cfg or RunConfig()
    return [run_experiment(exp_id, cfg) for exp_id in (only or sorted(RUNNERS))]
