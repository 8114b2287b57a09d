import json

import pytest

from ckledger.cli import main


def run(capsys, *argv) -> tuple[int, dict]:
    code = main([str(a) for a in argv])
    return code, json.loads(capsys.readouterr().out)


@pytest.fixture
def home(tmp_path, capsys):
    h = tmp_path / "home"
    run(capsys, "init", "--home", h)
    for name, attrs in [("alice", ["role=admin", "site=hq"]), ("carl", ["role=contractor", "site=hq"])]:
        args = ["enroll", "--home", h, name]
        for a in attrs:
            args += ["--attr", a]
        code, _ = run(capsys, *args)
        assert code == 0
    return h


def test_operational_flow(home, tmp_path, capsys):
    src = tmp_path / "in.bin"
    src.write_bytes(b"maintenance entry")
    policy = "(role=admin OR role=contractor) AND site=hq"
    code, out = run(capsys, "store", "--home", home, "--owner", "ops", "--policy", policy, "--file", src)
    assert code == 0 and out["epoch"] == 0 and "abe_encrypt" in out["timing_ms"]
    cid = out["cid"]

    code, out = run(capsys, "retrieve", "--home", home, "--principal", "carl", "--cid", cid, "--out", tmp_path / "o1")
    assert code == 0 and (tmp_path / "o1").read_bytes() == b"maintenance entry"

    assert run(capsys, "revoke", "--home", home, "carl")[1]["revoked"] == ["carl"]
    assert run(capsys, "rollover", "--home", home)[1] == {"epoch": 1, "reissued": ["alice"], "revoked": ["carl"]}
    code, out = run(capsys, "rotate", "--home", home, "--epoch", "1")
    assert out["rotated"] == [cid] and out["epochs"] == [1]

    code, out = run(capsys, "retrieve", "--home", home, "--principal", "carl", "--cid", cid, "--out", tmp_path / "o2")
    assert code == 1 and out["error"] == "NotSatisfied"
    code, out = run(capsys, "gateway-retrieve", "--home", home, "--principal", "alice", "--cid", cid, "--out", tmp_path / "o3")
    assert code == 0 and (tmp_path / "o3").read_bytes() == b"maintenance entry"

    code, out = run(capsys, "baseline-request", "--home", home, "--principal", "alice", "--cid", cid)
    assert code == 0 and out["key_bytes"] == 32
    code, out = run(capsys, "baseline-request", "--home", home, "--principal", "carl", "--cid", cid)
    assert code == 1 and out["error"] == "Unauthorized"

    code, out = run(capsys, "rekey-run", "--home", home, "--strategy", "naive", "--window", 60, "--event", 5, "--event", 9)
    assert out["update_count"] == 2
    code, out = run(capsys, "ledger", "verify", "--home", home)
    assert out["ok"] and out["entries"] == 4
    code, out = run(capsys, "ledger", "history", "--home", home, "--cid", cid)
    assert [r["epoch"] for r in out["records"]] == [0, 1, 2, 3]


def test_uninitialised_home(tmp_path, capsys):
    code, out = run(capsys, "rollover", "--home", tmp_path / "nope")
    assert code == 1


def test_bad_policy_reports_offset(home, tmp_path, capsys):
    src = tmp_path / "f"
    src.write_bytes(b"x")
    code, out = run(capsys, "store", "--home", home, "--owner", "o", "--policy", "a=1 AND", "--file", src)
    assert code == 1 and "offset 8" in out["message"]


def test_bench_single_experiment(tmp_path, capsys):
    code, out = run(capsys, "bench", "exp7", "--mode", "calibrated", "--seed", 3, "--out", tmp_path / "r", "--no-fsync")
    assert code == 0
    assert sorted(out["files"]) == ["exp7.csv", "exp7.json"]
    assert out["summaries"]["exp7"]["ck_updates"] == 30
    assert (tmp_path / "r" / "manifest.json").exists()
