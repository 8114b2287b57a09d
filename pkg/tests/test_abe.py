import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ckledger.abe import reference
from ckledger.abe.reference import ReferenceBackend, finish, leaf_shares, setup, transform, transform_keygen
from ckledger.abe.types import CiphertextKey, TransformKey, UserAttributeKey
from ckledger.errors import MalformedCiphertext, NotSatisfied, PolicyError
from ckledger.policy import (
    Attribute,
    PolicyForm,
    attach_epoch,
    epoch_attribute,
    gen_policy,
    leaves,
    parse,
    satisfies,
)
from test_policy import random_policy

K = bytes(range(32))


def try_decrypt(be, attrs, ck):
    try:
        return be.decrypt(be.keygen("u", attrs), ck)
    except NotSatisfied:
        return None


@pytest.mark.parametrize("k", range(1, 9))
def test_decrypt_iff_satisfies_exhaustive(backend, k):
    policies = [random_policy(k, 1000 + k), random_policy(k, 2000 + k)]
    if k >= 2:
        policies += [gen_policy(k, PolicyForm.AND_OF_OR, k), gen_policy(k, PolicyForm.AND, k)]
    for p in policies:
        ck = backend.encrypt(p, K)
        universe = sorted(set(leaves(p)))
        for bits in itertools.product([False, True], repeat=len(universe)):
            held = {a for a, b in zip(universe, bits) if b}
            if not held:
                continue  # keys need at least one attribute
            got = try_decrypt(backend, held, ck)
            assert (got == K) == satisfies(p, held)
            assert got in (None, K)


def test_empty_attribute_set_rejected(backend):
    with pytest.raises(PolicyError):
        backend.keygen("nobody", set())


def test_epoch_mismatch_not_satisfied(backend):
    base = parse("role=admin")
    ck = backend.encrypt(attach_epoch(base, 2), K)
    old = backend.keygen("a", {Attribute.parse("role=admin"), epoch_attribute(1)})
    new = backend.keygen("a", {Attribute.parse("role=admin"), epoch_attribute(2)})
    with pytest.raises(NotSatisfied):
        backend.decrypt(old, ck)
    assert backend.decrypt(new, ck) == K
    assert ck.epoch == 2 and new.epoch == 2


def test_keys_from_another_master_fail():
    p = parse("a=1 AND b=2")
    ck = ReferenceBackend(setup(1)).encrypt(p, K)
    stranger = ReferenceBackend(setup(2)).keygen("x", {Attribute.parse("a=1"), Attribute.parse("b=2")})
    with pytest.raises(NotSatisfied):
        reference.decrypt(stranger, ck)


def test_encryption_is_randomized(backend):
    p = parse("a=1 AND b=2")
    assert backend.encrypt(p, K).to_bytes() != backend.encrypt(p, K).to_bytes()


def test_and_shares_are_individually_useless(backend):
    """No single AND share reveals anything the other half is needed for."""
    p = parse("a=1 AND b=2")
    ck = backend.encrypt(p, K)
    one = backend.keygen("x", {Attribute.parse("a=1")})
    two = backend.keygen("y", {Attribute.parse("b=2")})
    s1, s2 = leaf_shares(one, ck)["a=1"], leaf_shares(two, ck)["b=2"]
    assert s1 != s2
    with pytest.raises(NotSatisfied):
        backend.decrypt(one, ck)


def test_ciphertext_key_serialization_round_trip(backend):
    ck = backend.encrypt(attach_epoch(parse("(a=1 OR b=2) AND c=3"), 5), K)
    raw = ck.to_bytes()
    assert raw[:4] == b"CKEY" and raw[4] == 1 and raw[5] == 0
    back = CiphertextKey.from_bytes(raw)
    assert back == ck
    assert back.epoch == 5
    assert back.policy_text == "((a=1 OR b=2) AND c=3 AND epoch=5)"


@pytest.mark.parametrize("cut", [0, 3, 5, 10, -1])
def test_truncated_ciphertext_key(backend, cut):
    raw = backend.encrypt(parse("a=1"), K).to_bytes()
    with pytest.raises(MalformedCiphertext):
        CiphertextKey.from_bytes(raw[:cut])


def test_trailing_bytes_rejected(backend):
    raw = backend.encrypt(parse("a=1"), K).to_bytes()
    with pytest.raises(MalformedCiphertext):
        CiphertextKey.from_bytes(raw + b"\x00")


def test_share_tree_shape_checked(backend):
    ck = backend.encrypt(parse("a=1 AND b=2"), K)
    uk = backend.keygen("u", {Attribute.parse("a=1"), Attribute.parse("b=2")})
    bad = CiphertextKey(ck.policy_text, ck.epoch, ck.share_tree[:-1], ck.wrapped_key)
    with pytest.raises(MalformedCiphertext):
        backend.decrypt(uk, bad)
    swapped = CiphertextKey("(a=1 OR b=2)", ck.epoch, ck.share_tree, ck.wrapped_key)
    with pytest.raises((MalformedCiphertext, NotSatisfied)):
        backend.decrypt(uk, swapped)


def test_tampered_wrapped_key(backend):
    ck = backend.encrypt(parse("a=1"), K)
    wrapped = bytearray(ck.wrapped_key)
    wrapped[-1] ^= 1
    bad = CiphertextKey(ck.policy_text, ck.epoch, ck.share_tree, bytes(wrapped))
    with pytest.raises(MalformedCiphertext):
        backend.decrypt(backend.keygen("u", {Attribute.parse("a=1")}), bad)


def test_user_key_json_round_trip(backend):
    uk = backend.keygen("p", {Attribute.parse("a=1"), epoch_attribute(3)})
    back = UserAttributeKey.from_json(uk.to_json())
    assert back.tokens == uk.tokens and back.epoch == 3 and back.principal == "p"


def test_transform_finish_equals_decrypt_on_200_random_pairs(backend):
    rng = random.Random(99)
    agree = 0
    for i in range(200):
        p = random_policy(rng.randrange(1, 7), rng.randrange(1 << 30))
        universe = sorted(set(leaves(p)))
        held = {a for a in universe if rng.random() < 0.6} or {universe[0]}
        uk = backend.keygen(f"u{i}", held)
        ck = backend.encrypt(p, K)
        tk, ek = transform_keygen(uk)
        try:
            direct = backend.decrypt(uk, ck)
        except NotSatisfied:
            direct = None
        try:
            assisted = finish(ek, transform(tk, ck, ek))
        except NotSatisfied:
            assisted = None
        assert direct == assisted
        agree += direct is not None
    assert 20 < agree < 200  # both outcomes exercised


def test_transform_requires_gateway_scope(backend):
    uk = backend.keygen("u", {Attribute.parse("a=1")})
    ck = backend.encrypt(parse("a=1"), K)
    _, ek = transform_keygen(uk)
    with pytest.raises(ValueError):
        transform(TransformKey("u", uk.tokens, gateway_scoped=False), ck, ek)


def test_partial_ciphertext_useless_without_retrieval_secret(backend):
    uk = backend.keygen("u", {Attribute.parse("a=1")})
    ck = backend.encrypt(parse("a=1"), K)
    tk, ek = transform_keygen(uk)
    _, other = transform_keygen(uk)
    with pytest.raises(Exception):
        finish(other, transform(tk, ck, ek))


@settings(max_examples=40)
@given(st.binary(min_size=32, max_size=32), st.integers(1, 6), st.integers(0, 10**6))
def test_satisfying_key_recovers_any_data_key(key, k, seed):
    from ckledger.policy import a_satisfying_set

    backend = ReferenceBackend(setup(7))
    p = random_policy(k, seed)
    uk = backend.keygen("u", a_satisfying_set(p))
    assert backend.decrypt(uk, backend.encrypt(p, key)) == key
