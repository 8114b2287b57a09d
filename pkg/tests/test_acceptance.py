"""Acceptance criteria, one test each.

Every test records a ``criterion N [PASS|FAIL]`` line (shown in the terminal
summary) before asserting, so a full run prints the whole scorecard.
"""

import hashlib
import itertools
import math
import os
import random
import subprocess
import sys
import time

import pytest

from ckledger import envelope
from ckledger.abe.reference import ReferenceBackend, finish, setup, transform, transform_keygen
from ckledger.bench.experiments import RunConfig, run_exp1, run_exp2, run_exp3, run_exp4, run_exp5, run_exp6, run_exp7
from ckledger.cas import ContentStore
from ckledger.errors import AuthenticationError, NotSatisfied
from ckledger.ledger import LEDGER_FILE, Ledger, MetadataRecord
from ckledger.metering import Mode
from ckledger.policy import Attribute, leaves, satisfies
from test_policy import oracle, random_policy

CALIBRATED = RunConfig(mode=Mode.CALIBRATED, seed=42)
MEASURED = RunConfig(mode=Mode.MEASURED, seed=42)


def within(value: float, target: float, rel: float) -> bool:
    return abs(value - target) <= rel * abs(target)


def check(criterion, number, name, results):
    """``results`` is a list of (ok, description); record and assert."""
    failed = [d for ok, d in results if not ok]
    detail = "; ".join(failed) if failed else f"{len(results)} checks"
    criterion(number, name, not failed, detail)
    assert not failed, detail


# reference values for the 1 MiB object: form, k, enc, dec, store, retrieve
BREAKDOWN_1MIB = [
    ("AND", 3, 42.13, 11.13, 47.28, 15.37),
    ("AND", 6, 102.60, 11.17, 107.36, 16.33),
    ("AND_OF_OR", 3, 67.74, 11.22, 72.73, 15.61),
    ("AND_OF_OR", 6, 185.90, 11.10, 191.20, 14.59),
]


def test_criterion_1_store_retrieve_breakdown(criterion):
    t0 = time.perf_counter()
    result = run_exp1(cfg=CALIBRATED)
    elapsed = time.perf_counter() - t0
    rows = {(r["form"], r["k"]): r for r in result.summary["table"]}
    checks = [(elapsed < 10.0, f"runtime {elapsed:.2f}s")]
    for form, k, enc, dec, store, retrieve in BREAKDOWN_1MIB:
        row = rows[(form, k)]
        for col, target in (("abe_enc_ms", enc), ("abe_dec_ms", dec), ("store_e2e_ms", store), ("retrieve_e2e_ms", retrieve)):
            checks.append((within(row[col], target, 0.02), f"{form},{k} {col}={row[col]:.3f} vs {target}"))
    share = 100 * rows[("AND_OF_OR", 6)]["abe_enc_ms"] / rows[("AND_OF_OR", 6)]["store_e2e_ms"]
    checks.append((abs(share - 97.2) <= 0.5, f"abe share {share:.2f}%"))
    checks.append((result.summary["chain_ok"], "chain"))
    check(criterion, 1, "store/retrieve breakdown table", checks)


def test_criterion_2_rekey_cost_under_churn(criterion):
    result = run_exp2(cfg=CALIBRATED)
    rows = result.rows
    top = [r for r in rows if r["churn_per_min"] == 10]
    naive = next(r for r in top if r["strategy"] == "naive")
    e60 = next(r for r in top if r["epoch_len_s"] == 60)
    e10 = next(r for r in top if r["epoch_len_s"] == 10)
    checks = [
        (within(e60["crypto_cost_s"], 129, 0.02), f"epoch-60 {e60['crypto_cost_s']:.2f}s"),
        (within(e10["crypto_cost_s"], 775, 0.02), f"epoch-10 {e10['crypto_cost_s']:.2f}s"),
        (within(naive["crypto_cost_s"], 1292, 0.02), f"naive {naive['crypto_cost_s']:.2f}s"),
        (e60["update_count"] == 600, f"epoch-60 updates {e60['update_count']}"),
        (e10["update_count"] == 3600, f"epoch-10 updates {e10['update_count']}"),
        (naive["update_count"] == 6000, f"naive updates {naive['update_count']}"),
        (naive["R"] == 30, f"R={naive['R']}"),
    ]
    for r in rows:
        checks.append((r["update_count"] == r["predicted_updates"], f"plan/model count {r}"))
        if r["strategy"] == "naive":
            for e in (x for x in rows if x["churn_per_min"] == r["churn_per_min"] and x["strategy"] == "epoch"):
                ratio = r["update_count"] / e["update_count"]
                checks.append((ratio == r["R"] / e["E"], f"ratio {ratio} vs R/E at churn {r['churn_per_min']}"))
    for L in (10, 60):
        totals = {r["crypto_cost_s"] for r in rows if r["epoch_len_s"] == L}
        checks.append((len(totals) == 1, f"epoch-{L} total depends on churn: {totals}"))
    checks.append((result.summary["chain_ok"], "chain"))
    check(criterion, 2, "naive vs epoch rekey cost", checks)


def test_criterion_3_ledger_scaling(criterion):
    result = run_exp3(cfg=CALIBRATED)
    checks = []
    for N, ratio in result.summary["growth_ratio"].items():
        checks.append((within(ratio, 4.0, 0.10), f"N={N} growth ratio {ratio:.3f}"))
    for M, var in result.summary["growth_variation_across_N"].items():
        checks.append((var < 0.02, f"M={M} variation across N {var:.4f}"))
    for row in result.rows:
        checks.append((row["reads"] == 5 * row["N"], f"reads {row['reads']} for N={row['N']}"))
    checks.append((result.summary["chain_ok"], "chain"))
    check(criterion, 3, "ledger growth scales with assets", checks)


def test_criterion_4_constrained_clients(criterion):
    result = run_exp4(cfg=CALIBRATED)
    by = {r["slowdown"]: r for r in result.rows}
    gw = [r["gateway_mode_p50_ms"] for r in result.rows]
    variation = (max(gw) - min(gw)) / min(gw)
    checks = [
        (within(by[4]["full_client_p50_ms"], 46.0, 0.05), f"full p50 at 4x {by[4]['full_client_p50_ms']:.3f}"),
        (within(by[4]["relief_ratio"], 4.17, 0.05), f"relief {by[4]['relief_ratio']:.3f}"),
        (variation < 0.15, f"gateway variation {variation:.4f}"),
        (within(by[1]["relief_ratio"], 1.0, 0.15), f"relief at 1x {by[1]['relief_ratio']:.3f}"),
    ]
    check(criterion, 4, "gateway relief for slow clients", checks)


def test_criterion_5_key_access_baseline(criterion):
    cal = {r["path"]: r for r in run_exp5(cfg=CALIBRATED).rows}
    meas = {r["path"]: r for r in run_exp5(cfg=MEASURED).rows}
    checks = [
        (within(cal["ledger_ck"]["p50_ms"], 11.77, 0.02), f"ledger_ck p50 {cal['ledger_ck']['p50_ms']:.3f}"),
        (within(cal["online_key_server"]["p50_ms"], 1.28, 0.02), f"online p50 {cal['online_key_server']['p50_ms']:.3f}"),
    ]
    for rows, mode in ((cal, "calibrated"), (meas, "measured")):
        for path in rows:
            checks.append((rows[path]["n"] == 50, f"{mode} {path} n={rows[path]['n']}"))
        for stat in ("mean_ms", "p50_ms", "p99_ms"):
            o, l = rows["online_key_server"][stat], rows["ledger_ck"][stat]
            checks.append((o < l, f"{mode} {stat}: online {o:.4f} vs ledger {l:.4f}"))
    check(criterion, 5, "ledger key access vs online key server", checks)


def test_criterion_6_revocation_case_study(criterion):
    result = run_exp7(cfg=CALIBRATED)
    table = {r["principal"]: (r["before_success"], r["after_success"]) for r in result.rows}
    expected = {
        "alice_admin": (30, 30),
        "bob_maint": (30, 30),
        "carl_r_contract": (30, 0),
        "dana_other": (0, 0),
    }
    s = result.summary
    checks = [(table[p] == v, f"{p} {table[p]} vs {v}") for p, v in expected.items()]
    checks += [
        (s["ck_updates"] == 30, f"ck updates {s['ck_updates']}"),
        (s["new_cas_objects"] == 0, f"new CAS objects {s['new_cas_objects']}"),
        (s["cas_bytes_unchanged"], "CAS bytes changed"),
        (within(s["mean_ck_update_ms"], 58.8, 0.02), f"mean update {s['mean_ck_update_ms']:.2f}"),
        (s["chain_ok"], "chain"),
    ]
    check(criterion, 6, "revocation case study success matrix", checks)


def test_criterion_7_property_suites(criterion, tmp_path):
    checks = []

    # (a) satisfaction vs truth-table oracle, exhaustive for k <= 10
    bad = 0
    for k in range(1, 11):
        for seed in range(4):
            p = random_policy(k, 7000 + 13 * k + seed)
            names = sorted({str(a) for a in leaves(p)})
            for bits in itertools.product([False, True], repeat=len(names)):
                held = {n for n, b in zip(names, bits) if b}
                bad += satisfies(p, {Attribute.parse(h) for h in held}) != oracle(p, held)
    checks.append((bad == 0, f"(a) {bad} truth-table mismatches"))

    # (b) decrypt succeeds iff satisfies, exhaustive for k <= 8
    be = ReferenceBackend(setup(11))
    data_key = os.urandom(32)
    bad = 0
    for k in range(1, 9):
        for seed in range(2):
            p = random_policy(k, 8000 + 13 * k + seed)
            ck = be.encrypt(p, data_key)
            universe = sorted(set(leaves(p)))
            for bits in itertools.product([False, True], repeat=len(universe)):
                held = {a for a, b in zip(universe, bits) if b}
                if not held:
                    continue
                try:
                    ok = be.decrypt(be.keygen("u", held), ck) == data_key
                except NotSatisfied:
                    ok = False
                bad += ok != satisfies(p, held)
    checks.append((bad == 0, f"(b) {bad} decrypt/satisfies disagreements"))

    # (c) every single-byte corruption of a 100-entry ledger is detected
    root = tmp_path / "ledger"
    with Ledger(root, fsync=False) as ledger:
        for i in range(100):
            cid = hashlib.sha256(b"%d" % i).hexdigest()
            ledger.append([MetadataRecord(cid, b"ck%d" % i, cid, 0, "o", i)])
    raw = (root / LEDGER_FILE).read_bytes()
    missed = 0
    with Ledger(root) as ledger:
        fd = os.open(root / LEDGER_FILE, os.O_RDWR)
        try:
            for pos in range(len(raw)):
                os.pwrite(fd, bytes([raw[pos] ^ 0x5A]), pos)
                missed += ledger.verify_chain().ok
                os.pwrite(fd, raw[pos : pos + 1], pos)
        finally:
            os.close(fd)
        intact = ledger.verify_chain().ok
    checks.append((missed == 0 and intact, f"(c) {missed} of {len(raw)} corruptions undetected"))

    # (d) CAS round trip and dedup for 1000 random blobs
    rng = random.Random(42)
    store = ContentStore(tmp_path / "cas")
    blobs = [rng.randbytes(rng.randrange(1, 4096)) for _ in range(1000)]
    cids = [store.put(b) for b in blobs]
    again = [store.put(b) for b in blobs]
    ok = cids == again and all(store.get(c) == b for c, b in zip(cids, blobs))
    ok &= all(c == hashlib.sha256(b).hexdigest() for c, b in zip(cids, blobs))
    ok &= store.stats()[0] == len(set(blobs))
    checks.append((ok, "(d) CAS round trip / dedup"))

    # (e) AEAD round trip and single-bit tamper across the size grid
    ok = True
    for size in (0, 1, 1024, 10 * 1024, 1 << 20):
        data = rng.randbytes(size)
        key, sealed = envelope.seal(data)
        blob = sealed.to_bytes()
        ok &= envelope.open_sealed(key, blob) == data
        for _ in range(8):
            pos = rng.randrange(len(blob))
            bad_blob = bytearray(blob)
            bad_blob[pos] ^= 1 << rng.randrange(8)
            try:
                envelope.open_sealed(key, bytes(bad_blob))
                ok = False
            except AuthenticationError:
                pass
    checks.append((ok, "(e) AEAD round trip / tamper"))

    # (f) transform/finish equals direct decrypt on 200 random pairs
    disagree = 0
    for i in range(200):
        p = random_policy(rng.randrange(1, 8), rng.randrange(1 << 30))
        universe = sorted(set(leaves(p)))
        held = {a for a in universe if rng.random() < 0.6} or {universe[0]}
        uk = be.keygen(f"u{i}", held)
        ck = be.encrypt(p, data_key)
        tk, ek = transform_keygen(uk)
        outcomes = []
        for fn in (lambda: be.decrypt(uk, ck), lambda: finish(ek, transform(tk, ck, ek))):
            try:
                outcomes.append(fn())
            except NotSatisfied:
                outcomes.append(None)
        disagree += outcomes[0] != outcomes[1]
    checks.append((disagree == 0, f"(f) {disagree} transform/decrypt disagreements"))
    check(criterion, 7, "property suites (a)-(f)", checks)


def test_criterion_8_append_batching(criterion):
    checks = []
    for cfg, label in ((MEASURED, "measured"), (CALIBRATED, "calibrated")):
        result = run_exp6(cfg=cfg)
        rows = result.rows
        for r in rows:
            checks.append((r["entries"] == math.ceil(1000 / r["batch_size"]), f"{label} b={r['batch_size']} entries {r['entries']}"))
            checks.append((r["chain_ok"], f"{label} b={r['batch_size']} chain"))
        upto10 = [r["throughput_rps"] for r in rows if r["batch_size"] <= 10]
        mono = all(a <= b for a, b in zip(upto10, upto10[1:]))
        checks.append((mono, f"{label} throughput batch 1..10 {[round(x) for x in upto10]}"))
    check(criterion, 8, "ledger append batching", checks)


def test_criterion_9_determinism(criterion, tmp_path):
    outs = []
    for i, hashseed in enumerate(("1", "2")):
        out = tmp_path / f"run{i}"
        env = dict(os.environ, PYTHONHASHSEED=hashseed)
        proc = subprocess.run(
            [sys.executable, "-m", "ckledger", "bench", "run-all", "--mode", "calibrated", "--seed", "42", "--out", str(out)],
            capture_output=True,
            text=True,
            env=env,
            timeout=600,
        )
        assert proc.returncode == 0, proc.stdout + proc.stderr
        outs.append(out)
    a = sorted(p.name for p in outs[0].iterdir())
    b = sorted(p.name for p in outs[1].iterdir())
    checks = [(a == b, f"file sets differ {a} vs {b}")]
    checks.append(("manifest.json" in a and any(n.endswith(".csv") for n in a), "outputs present"))
    for name in a:
        if name.endswith(".csv") or name == "manifest.json":
            same = (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
            checks.append((same, f"{name} differs"))
    check(criterion, 9, "calibrated run-all is byte-identical", checks)
