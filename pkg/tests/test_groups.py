import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import StubRng
from evote.canonical import Reader, derive_rng
from evote.errors import (
    DecodeRangeError,
    DuplicateShareError,
    InvalidPartialProof,
    MissingShareError,
)
from evote.groups import (
    Ciphertext,
    GroupParams,
    PROD_GROUP_3072,
    TEST_GROUP,
    combine,
    decrypt,
    encrypt,
    keygen,
    partial_decrypt,
    reencrypt,
    threshold_decrypt,
    threshold_keygen,
)


# --- frozen worked example: p=23, q=11, g=2, sk=3 ---

def test_keygen_from_known_secret(grp):
    kp = keygen(grp, StubRng([3]))
    assert kp.sk == 3
    assert kp.pk == 8


def test_encrypt_known_vector(grp):
    ct = encrypt(grp, 8, 1, 4)
    assert (ct.c1, ct.c2) == (16, 4)


def test_decrypt_known_vector(grp):
    assert decrypt(grp, 3, Ciphertext(16, 4), 5) == 1


def test_reencrypt_known_vector(grp):
    ct = reencrypt(grp, 8, Ciphertext(16, 4), 1)
    assert (ct.c1, ct.c2) == (9, 9)
    assert decrypt(grp, 3, ct, 5) == 1


def test_zero_randomness_rejected(grp):
    with pytest.raises(ValueError):
        encrypt(grp, 8, 1, 0)


def test_negative_plaintext_rejected(grp):
    with pytest.raises(ValueError):
        encrypt(grp, 8, -1, 4)


def test_decode_bound_enforced(grp):
    ct = encrypt(grp, 8, 5, 4)
    with pytest.raises(DecodeRangeError):
        decrypt(grp, 3, ct, 4)
    assert decrypt(grp, 3, ct, 5) == 5


# --- group parameter validation ---

def test_bad_generator_rejected():
    # 5 generates the full group of order 22, not the order-11 subgroup.
    with pytest.raises(ValueError):
        GroupParams(p=23, q=11, g=5)


def test_bad_subgroup_order_rejected():
    with pytest.raises(ValueError):
        GroupParams(p=23, q=7, g=2)


def test_production_group_is_well_formed():
    g = PROD_GROUP_3072
    assert g.p.bit_length() == 3072
    assert (g.p - 1) % g.q == 0
    assert pow(g.g, g.q, g.p) == 1


# --- algebraic properties over the test group ---

@given(st.integers(0, 5), st.integers(1, 10), st.integers(1, 10))
def test_encrypt_decrypt_round_trip(m, r, sk):
    grp = TEST_GROUP
    pk = pow(grp.g, sk, grp.p)
    assert decrypt(grp, sk, encrypt(grp, pk, m, r), 5) == m


@given(st.integers(0, 3), st.integers(0, 3), st.integers(1, 10), st.integers(1, 10), st.integers(1, 10))
def test_homomorphic_addition(m1, m2, r1, r2, sk):
    grp = TEST_GROUP
    pk = pow(grp.g, sk, grp.p)
    total = combine(encrypt(grp, pk, m1, r1), encrypt(grp, pk, m2, r2), grp)
    assert decrypt(grp, sk, total, 6) == m1 + m2


@given(st.integers(0, 5), st.integers(1, 10), st.integers(0, 10), st.integers(1, 10))
def test_reencrypt_preserves_plaintext(m, r, r_prime, sk):
    grp = TEST_GROUP
    pk = pow(grp.g, sk, grp.p)
    ct = reencrypt(grp, pk, encrypt(grp, pk, m, r), r_prime)
    assert decrypt(grp, sk, ct, 5) == m


def test_reencrypt_changes_ciphertext(grp):
    ct = encrypt(grp, 8, 1, 4)
    assert reencrypt(grp, 8, ct, 3) != ct


def test_ciphertext_serialization_round_trip(grp):
    ct = encrypt(grp, 8, 1, 4)
    r = Reader(ct.to_bytes())
    assert Ciphertext.read_from(r) == ct
    r.expect_end()


# --- n-of-n threshold decryption ---

def test_threshold_key_combines_commitments(grp):
    ek, shares = threshold_keygen(grp, 3, StubRng([2, 3, 4]))
    assert [s.x for s in shares] == [2, 3, 4]
    # g^(2+3+4) = g^9
    assert ek.h == pow(grp.g, 9, grp.p)
    prod = 1
    for s in shares:
        prod = (prod * s.h) % grp.p
    assert ek.h == prod


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_full_share_set_matches_single_key_oracle(grp, n):
    ek, shares = threshold_keygen(grp, n, derive_rng("thresh", n))
    sk_equivalent = sum(s.x for s in shares) % grp.q
    commitments = {s.index: s.h for s in shares}
    for m in range(3):
        ct = encrypt(grp, ek.h, m, 4)
        partials = [partial_decrypt(grp, s, ct) for s in shares]
        assert threshold_decrypt(grp, ct, partials, commitments, 3) == m
        assert decrypt(grp, sk_equivalent, ct, 3) == m


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_every_proper_subset_fails(grp, n):
    ek, shares = threshold_keygen(grp, n, derive_rng("subset", n))
    commitments = {s.index: s.h for s in shares}
    ct = encrypt(grp, ek.h, 1, 5)
    partials = [partial_decrypt(grp, s, ct) for s in shares]
    for drop in range(n):
        subset = partials[:drop] + partials[drop + 1 :]
        with pytest.raises(MissingShareError):
            threshold_decrypt(grp, ct, subset, commitments, 2)


def test_duplicate_share_rejected(grp):
    ek, shares = threshold_keygen(grp, 2, derive_rng("dup"))
    commitments = {s.index: s.h for s in shares}
    ct = encrypt(grp, ek.h, 1, 5)
    partials = [partial_decrypt(grp, s, ct) for s in shares]
    with pytest.raises(DuplicateShareError):
        threshold_decrypt(grp, ct, partials + [partials[0]], commitments, 2)


def test_forged_partial_rejected(grp):
    ek, shares = threshold_keygen(grp, 2, derive_rng("forge"))
    commitments = {s.index: s.h for s in shares}
    ct = encrypt(grp, ek.h, 1, 5)
    partials = [partial_decrypt(grp, s, ct) for s in shares]
    bad = type(partials[0])(
        trustee_index=partials[0].trustee_index,
        d=(partials[0].d * grp.g) % grp.p,
        proof=partials[0].proof,
    )
    with pytest.raises(InvalidPartialProof):
        threshold_decrypt(grp, ct, [bad, partials[1]], commitments, 2)


def test_threshold_decrypt_respects_decode_bound(grp):
    ek, shares = threshold_keygen(grp, 3, derive_rng("bound"))
    commitments = {s.index: s.h for s in shares}
    ct = encrypt(grp, ek.h, 4, 5)
    partials = [partial_decrypt(grp, s, ct) for s in shares]
    with pytest.raises(DecodeRangeError):
        threshold_decrypt(grp, ct, partials, commitments, 3)
