import pytest

from ckledger.authority import Authority, EpochState
from ckledger.errors import AuthorityError, NotSatisfied
from ckledger.policy import Attribute, attach_epoch, epoch_attribute, parse


def attrs(*texts):
    return [Attribute.parse(t) for t in texts]


def test_enroll_issues_current_epoch(backend):
    auth = Authority(backend)
    uk = auth.enroll("alice", attrs("role=admin"))
    assert uk.epoch == 0
    assert epoch_attribute(0) in uk.attributes


def test_enroll_validation(backend):
    auth = Authority(backend)
    auth.enroll("alice", attrs("role=admin"))
    with pytest.raises(AuthorityError):
        auth.enroll("alice", attrs("role=admin"))
    with pytest.raises(AuthorityError):
        auth.enroll("bob", [])
    with pytest.raises(AuthorityError):
        auth.enroll("eve", attrs("epoch=9"))
    with pytest.raises(AuthorityError):
        auth.revoke("nobody")


def test_rollover_skips_revoked(backend):
    auth = Authority(backend)
    auth.enroll("alice", attrs("role=admin"))
    auth.enroll("carl", attrs("role=admin"))
    old_carl = auth.key_for("carl")
    auth.revoke("carl")
    epoch, reissued = auth.rollover()
    assert epoch == 1 and sorted(reissued) == ["alice"]
    assert reissued["alice"].epoch == 1
    # carl keeps what he already holds and nothing newer
    assert auth.key_for("carl") is old_carl
    ck = backend.encrypt(attach_epoch(parse("role=admin"), 1), bytes(32))
    assert backend.decrypt(reissued["alice"], ck) == bytes(32)
    with pytest.raises(NotSatisfied):
        backend.decrypt(old_carl, ck)


def test_reinstate_takes_effect_next_rollover(backend):
    auth = Authority(backend)
    auth.enroll("carl", attrs("role=x"))
    auth.revoke("carl")
    auth.rollover()
    auth.reinstate("carl")
    _, reissued = auth.rollover()
    assert "carl" in reissued and reissued["carl"].epoch == 2


def test_state_snapshot_round_trip(backend, tmp_path):
    auth = Authority(backend)
    auth.enroll("alice", attrs("role=admin", "site=hq"))
    auth.enroll("carl", attrs("role=contractor"))
    auth.revoke("carl")
    auth.rollover()
    auth.save(tmp_path / "a.json")
    back = Authority.load(tmp_path / "a.json", backend)
    assert back.epoch == 1
    assert back.state.revoked == {"carl"}
    assert back.state.enrolled["alice"] == frozenset(attrs("role=admin", "site=hq"))
    assert EpochState.from_json(auth.state.to_json()).to_json() == auth.state.to_json()


def test_revoked_principal_without_key_cannot_get_one(backend):
    auth = Authority(backend)
    auth.enroll("carl", attrs("role=x"))
    auth.revoke("carl")
    fresh = Authority(backend, auth.state)
    with pytest.raises(AuthorityError):
        fresh.key_for("carl")
