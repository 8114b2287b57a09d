"""Command line entry point.

Operational commands work on a home directory::

    HOME/master.key        authority master secret (0600)
    HOME/authority.json    epoch, enrolled attributes, revoked set
    HOME/keys/<p>.json     last key issued to principal p
    HOME/cas/              sealed payloads
    HOME/ledger/           metadata ledger segment
    HOME/owner_keys.json   owner-held data keys, used for rotation

Every command prints one JSON document on stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from ckledger.abe.reference import ReferenceBackend, transform_keygen
from ckledger.abe.types import CiphertextKey, MasterSecret, UserAttributeKey
from ckledger.authority import Authority
from ckledger.bench.emit import emit
from ckledger.bench.experiments import RUNNERS, RunConfig, run_all, run_experiment
from ckledger.cas import ContentStore
from ckledger.errors import CKLedgerError
from ckledger.ledger import Ledger
from ckledger.metering import Meter, Mode
from ckledger.policy import Attribute, parse
from ckledger.workflow import OnlineKeyServer, OwnerKeystore, RekeyPlan, Workflow


class Home:
    def __init__(self, path: str | os.PathLike) -> None:
        self.path = Path(path)

    @property
    def authority_file(self) -> Path:
        return self.path / "authority.json"

    def init(self) -> None:
        self.path.mkdir(parents=True, exist_ok=True)
        (self.path / "keys").mkdir(exist_ok=True)
        secret = self.path / "master.key"
        if not secret.exists():
            secret.write_bytes(os.urandom(32))
            os.chmod(secret, 0o600)
        if not self.authority_file.exists():
            Authority(self.backend()).save(self.authority_file)

    def backend(self) -> ReferenceBackend:
        try:
            return ReferenceBackend(MasterSecret((self.path / "master.key").read_bytes()))
        except FileNotFoundError:
            raise CKLedgerError(f"{self.path} is not initialised; run `ckledger init`") from None

    def authority(self) -> Authority:
        return Authority.load(self.authority_file, self.backend())

    def save_key(self, uk: UserAttributeKey) -> None:
        path = self.path / "keys" / f"{uk.principal}.json"
        path.write_text(uk.to_json(), encoding="utf-8")
        os.chmod(path, 0o600)

    def load_key(self, principal: str) -> UserAttributeKey:
        try:
            return UserAttributeKey.from_json((self.path / "keys" / f"{principal}.json").read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise CKLedgerError(f"no key on file for {principal}") from None

    def workflow(self, meter: Meter | None = None) -> Workflow:
        return Workflow(
            self.backend(),
            ContentStore(self.path / "cas"),
            Ledger(self.path / "ledger"),
            meter=meter,
            keystore=OwnerKeystore(self.path / "owner_keys.json"),
        )


def _print(obj: Any) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _ms(timing: dict[str, float]) -> dict[str, float]:
    return {k: round(v, 4) for k, v in timing.items()}


# --------------------------------------------------------------------------
# command handlers


def cmd_init(args) -> dict:
    Home(args.home).init()
    return {"home": str(args.home), "initialised": True}


def cmd_enroll(args) -> dict:
    home = Home(args.home)
    authority = home.authority()
    uk = authority.enroll(args.principal, [Attribute.parse(a) for a in args.attr])
    authority.save(home.authority_file)
    home.save_key(uk)
    return {"principal": uk.principal, "epoch": uk.epoch, "attributes": sorted(map(str, uk.attributes))}


def cmd_revoke(args) -> dict:
    home = Home(args.home)
    authority = home.authority()
    authority.revoke(args.principal)
    authority.save(home.authority_file)
    return {"revoked": sorted(authority.state.revoked), "epoch": authority.epoch, "effective_from": authority.epoch + 1}


def cmd_rollover(args) -> dict:
    home = Home(args.home)
    authority = home.authority()
    epoch, reissued = authority.rollover()
    authority.save(home.authority_file)
    for uk in reissued.values():
        home.save_key(uk)
    return {"epoch": epoch, "reissued": sorted(reissued), "revoked": sorted(authority.state.revoked)}


def cmd_store(args) -> dict:
    home = Home(args.home)
    epoch = home.authority().epoch if args.epoch is None else args.epoch
    data = Path(args.file).read_bytes()
    receipt = home.workflow().store(args.owner, data, parse(args.policy), epoch)
    r = receipt.record
    return {"cid": receipt.cid, "epoch": r.epoch, "policy_id": r.policy_id, "timing_ms": _ms(receipt.timing), "total_ms": receipt.total_ms}


def cmd_retrieve(args) -> dict:
    home = Home(args.home)
    got = home.workflow().retrieve(home.load_key(args.principal), args.cid, slowdown=args.slowdown)
    Path(args.out).write_bytes(got.plaintext)
    return {"cid": args.cid, "bytes": len(got.plaintext), "out": str(args.out), "timing_ms": _ms(got.timing), "total_ms": got.total_ms}


def cmd_rotate(args) -> dict:
    home = Home(args.home)
    wf = home.workflow()
    cids = args.cid or wf.ledger.cids()
    batch = wf.rotate_many(cids, new_epoch=args.epoch)
    return {
        "rotated": [r.cid for r in batch.records],
        "epochs": sorted({r.epoch for r in batch.records}),
        "crypto_ms": [round(v, 4) for v in batch.crypto_ms],
        "append_ms": batch.append_ms,
    }


def cmd_rekey_run(args) -> dict:
    home = Home(args.home)
    wf = home.workflow()
    plan = RekeyPlan(args.strategy.upper(), args.window, tuple(args.cid or wf.ledger.cids()), tuple(args.event), args.epoch_len)
    outcome = wf.execute_rekey(plan)
    return {
        "strategy": plan.strategy.value,
        "assets": plan.M,
        "rounds": outcome.rounds,
        "update_count": outcome.update_count,
        "total_crypto_cost_s": outcome.total_crypto_cost_s,
    }


def cmd_gateway_retrieve(args) -> dict:
    home = Home(args.home)
    tk, ek = transform_keygen(home.load_key(args.principal))
    got = home.workflow().gateway_retrieve(tk, ek, args.cid, client_slowdown=args.slowdown)
    Path(args.out).write_bytes(got.plaintext)
    return {
        "cid": args.cid,
        "bytes": len(got.plaintext),
        "client_ms": got.client_ms,
        "gateway_ms": got.gateway_ms,
        "timing_ms": _ms(got.timing),
        "total_ms": got.total_ms,
    }


def cmd_baseline_request(args) -> dict:
    home = Home(args.home)
    wf = home.workflow()
    authority = home.authority()
    record = wf.ledger.latest_ck(args.cid)
    server = OnlineKeyServer()
    server.register(args.cid, wf.keystore.recover(record), parse(CiphertextKey.from_bytes(record.ck).policy_text))
    if args.principal in authority.state.enrolled and args.principal not in authority.state.revoked:
        server.enroll(args.principal, authority.key_for(args.principal).attributes)
    key, ms = server.timed_request(args.principal, args.cid)
    return {"cid": args.cid, "principal": args.principal, "key_bytes": len(key), "total_ms": ms}


def cmd_ledger_verify(args) -> dict:
    root = Path(args.home) / "ledger" if args.home else args.dir
    with Ledger(root) as ledger:
        status = ledger.verify_chain()
    return {"ok": status.ok, "entries": status.entries, "first_bad_seq": status.first_bad_seq, "reason": status.reason}


def cmd_ledger_history(args) -> dict:
    with Ledger(Path(args.home) / "ledger") as ledger:
        history = ledger.history(args.cid)
    return {
        "cid": args.cid,
        "records": [
            {
                "epoch": r.epoch,
                "owner": r.owner_id,
                "policy": CiphertextKey.from_bytes(r.ck).policy_text,
                "policy_id": r.policy_id,
                "timestamp_us": r.timestamp,
            }
            for r in history
        ],
    }


def cmd_bench(args) -> dict:
    cfg = RunConfig(mode=Mode(args.mode), seed=args.seed, fsync=not args.no_fsync)
    if args.experiment == "run-all":
        results = run_all(cfg)
    else:
        results = [run_experiment(args.experiment, cfg)]
    manifest = emit(results, args.out, run_info={"mode": cfg.mode.value, "seed": cfg.seed})
    return {
        "mode": cfg.mode.value,
        "seed": cfg.seed,
        "manifest": str(manifest),
        "files": [f for r in results for f in r.files],
        "summaries": {r.exp_id: r.summary for r in results},
    }


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ckledger", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def with_home(name: str, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--home", required=True, type=Path, help="workspace directory")
        return p

    p = with_home("init", "create a workspace with a fresh master secret")
    p.set_defaults(func=cmd_init)

    p = with_home("enroll", "enroll a principal and issue its key")
    p.add_argument("principal")
    p.add_argument("--attr", action="append", required=True, help="name=value, repeatable")
    p.set_defaults(func=cmd_enroll)

    p = with_home("revoke", "mark a principal revoked from the next epoch")
    p.add_argument("principal")
    p.set_defaults(func=cmd_revoke)

    p = with_home("rollover", "advance the epoch and reissue keys to non-revoked principals")
    p.set_defaults(func=cmd_rollover)

    p = with_home("store", "seal a file and publish its key record")
    p.add_argument("--owner", required=True)
    p.add_argument("--policy", required=True)
    p.add_argument("--file", required=True)
    p.add_argument("--epoch", type=int, default=None, help="defaults to the authority's current epoch")
    p.set_defaults(func=cmd_store)

    p = with_home("retrieve", "fetch and decrypt an object")
    p.add_argument("--principal", required=True)
    p.add_argument("--cid", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--slowdown", type=float, default=1.0)
    p.set_defaults(func=cmd_retrieve)

    p = with_home("rotate", "re-encapsulate data keys under a newer epoch")
    p.add_argument("--cid", action="append", help="repeatable; defaults to every CID on the ledger")
    p.add_argument("--epoch", type=int, default=None, help="defaults to one past each CID's latest epoch")
    p.set_defaults(func=cmd_rotate)

    p = with_home("rekey-run", "execute a naive or epoch rekey plan")
    p.add_argument("--strategy", choices=("naive", "epoch"), required=True)
    p.add_argument("--window", type=float, required=True, help="seconds")
    p.add_argument("--epoch-len", type=float, default=None, help="seconds")
    p.add_argument("--event", type=float, action="append", default=[], help="revocation time in seconds, repeatable")
    p.add_argument("--cid", action="append")
    p.set_defaults(func=cmd_rekey_run)

    p = with_home("gateway-retrieve", "retrieve with gateway-assisted decryption")
    p.add_argument("--principal", required=True)
    p.add_argument("--cid", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--slowdown", type=float, default=1.0)
    p.set_defaults(func=cmd_gateway_retrieve)

    p = with_home("baseline-request", "obtain a data key from the online key server baseline")
    p.add_argument("--principal", required=True)
    p.add_argument("--cid", required=True)
    p.set_defaults(func=cmd_baseline_request)

    ledger = sub.add_parser("ledger", help="ledger inspection")
    lsub = ledger.add_subparsers(dest="ledger_command", required=True)
    p = lsub.add_parser("verify", help="re-hash the whole chain")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--home", type=Path)
    group.add_argument("--dir", type=Path, help="ledger directory")
    p.set_defaults(func=cmd_ledger_verify)
    p = lsub.add_parser("history", help="every record for one CID")
    p.add_argument("--home", type=Path, required=True)
    p.add_argument("--cid", required=True)
    p.set_defaults(func=cmd_ledger_history)

    bench = sub.add_parser("bench", help="run experiments and write CSV/JSON plus a manifest")
    bench.add_argument("experiment", choices=("run-all", *sorted(RUNNERS)))
    bench.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.CALIBRATED.value)
    bench.add_argument("--seed", type=int, default=42)
    bench.add_argument("--out", type=Path, default=Path("results"))
    bench.add_argument("--no-fsync", action="store_true", help="skip fsync on ledger appends")
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = args.func(args)
    except (CKLedgerError, ValueError, KeyError, OSError) as exc:
        _print({"error": type(exc).__name__, "message": str(exc)})
        return 1
    _print(result)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
