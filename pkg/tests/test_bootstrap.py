import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmpmboot.bootstrap import (
    BootstrappingKeySet,
    LookUpTable,
    RlweVector,
    blind_rotate_mmpm,
    blind_rotate_tfhe,
    boot_general,
    boot_mmpm,
    boot_tfhe,
    cmux_rlwe_vector,
    extract_msb,
    functional_bootstrap,
    keygen,
    mp_table,
    msb_table,
    negacyclic_extend,
    negacyclic_lift,
    tfhe_test_polynomial,
)
from mmpmboot.lattice import (
    DomainError,
    LweCiphertext,
    lwe_decrypt,
    lwe_encrypt,
    lwe_phase,
    rgsw_encrypt,
)
from mmpmboot.mmpm import apply_mmpm_to_ring_vector, build_test_vector, phi
from mmpmboot.params import get_preset
from mmpmboot.ring import ParameterError, RingElement, count_ring_mults
from mmpmboot.switching import modulus_switch

import oracles


@pytest.fixture(scope="module")
def small():
    p = get_preset("desk-small")
    sk, ek = keygen(p, np.random.default_rng(100))
    return p, sk, ek


@pytest.fixture(scope="module")
def tiny():
    p = get_preset("desk-tiny")
    sk, ek = keygen(p, np.random.default_rng(101))
    return p, sk, ek


def random_negacyclic(rng, t, t_out):
    return LookUpTable(tuple(oracles.random_negacyclic_table(rng, t, t_out)), t_out)


# -- tables ----------------------------------------------------------------------

def test_mp_and_msb_tables():
    t = 8
    mp = mp_table(t)
    assert mp.t == 16 and mp.nega_cyclic
    assert [mp(x) for x in (0, 3, 4, 11, 12, 15)] == [12, 12, 4, 4, 12, 12]
    msb = msb_table(t)
    assert all(msb(x) == 12 for x in range(8)) and all(msb(x) == 4 for x in range(8, 16))
    assert msb.nega_cyclic


def test_negacyclic_lift():
    f = LookUpTable((3, 1, 4, 1), 8)
    F = negacyclic_lift(f)
    assert F.values == (3, 1, 4, 1, 5, 7, 4, 7) and F.nega_cyclic


def test_extend_examples():
    assert negacyclic_extend(LookUpTable((0, 0, 0, 0), 8), 16) == [0] * 16
    f = LookUpTable((0, 1, 0, 3), 4)
    fp = negacyclic_extend(f, 16)
    for m in range(4):
        for e in (-1, 0, 1):
            assert fp[(4 * m + e) % 16] == f(m)
    with pytest.raises(DomainError):
        negacyclic_extend(LookUpTable((1, 1, 1, 1), 4), 16)


@given(st.integers(0, 2**32), st.sampled_from([4, 8, 16]), st.integers(1, 6))
@settings(max_examples=100, deadline=None)
def test_extend_plateaus_and_negacyclicity(seed, t, k):
    rng = np.random.default_rng(seed)
    f = random_negacyclic(rng, t, 16)
    q_prime = 2 * t * k + 2 * int(rng.integers(0, 3))  # not always divisible by t
    fp = negacyclic_extend(f, q_prime)
    delta = q_prime // t
    half = q_prime // 2
    assert all((fp[x + half] + fp[x]) % 16 == 0 for x in range(half))
    if q_prime % t == 0:
        for m in range(t):
            for e in range(-delta, delta + 1):
                if 2 * abs(e) < delta:
                    assert fp[(m * delta + e) % q_prime] == f(m)


# -- CMux and blind rotation --------------------------------------------------------

def plain_vector(v, Q):
    return RlweVector.trivial(v, Q)


@pytest.mark.parametrize("s_k", [0, 1, -1])
def test_cmux_rotates_by_secret(small, s_k):
    p, sk, ek = small
    rng = np.random.default_rng(5 + s_k)
    z = sk.z
    c_plus = rgsw_encrypt(max(s_k, 0), z, p.B, p.sigma_boot, rng)
    c_minus = rgsw_encrypt(max(-s_k, 0), z, p.B, p.sigma_boot, rng)
    f = oracles.random_negacyclic_table(rng, 2 * p.N * p.r, p.t_out)
    v = build_test_vector(f, p.r, p.N, p.t_out)
    a_k = int(rng.integers(0, 2 * p.N * p.r))
    acc = plain_vector(v, p.Q)
    with count_ring_mults() as c:
        out = cmux_rlwe_vector(c_plus, c_minus, a_k, acc)
    assert c.count == 8 * p.r * p.l_B
    want = apply_mmpm_to_ring_vector(phi(-a_k * s_k, p.r, p.N), list(v.entries))
    assert out.decrypt(z) == want


def test_blind_rotate_plaintext_simulation(small):
    p, sk, ek = small
    rng = np.random.default_rng(7)
    q_prime = p.q_prime
    f = oracles.random_negacyclic_table(rng, q_prime, p.t_out)
    v = build_test_vector(f, p.r, p.N, p.t_out)
    for _ in range(5):
        ct = LweCiphertext(rng.integers(0, q_prime, p.n), int(rng.integers(0, q_prime)), q_prime, p.t)
        acc = blind_rotate_mmpm(ct, v, ek.bk)
        phase = lwe_phase(ct, sk.s)
        want = apply_mmpm_to_ring_vector(phi(phase, p.r, p.N), list(v.entries))
        got = acc.decrypt(sk.z)
        assert got == want
        assert int(got[0].coeffs[0]) == f[phase]


def test_blind_rotate_degenerate_and_zero_secret(small):
    p, sk, ek = small
    rng = np.random.default_rng(8)
    f = oracles.random_negacyclic_table(rng, p.q_prime, p.t_out)
    v = build_test_vector(f, p.r, p.N, p.t_out)
    b = 37
    empty = BootstrappingKeySet((), ())
    ct0 = LweCiphertext(np.zeros(0, dtype=np.int64), b, p.q_prime, p.t)
    acc = blind_rotate_mmpm(ct0, v, empty, p.Q)
    triv = RlweVector.trivial(v, p.Q).apply(phi(b, p.r, p.N))
    assert np.array_equal(acc.a, triv.a) and np.array_equal(acc.b, triv.b)

    zeros = [rgsw_encrypt(0, sk.z, p.B, p.sigma_boot, rng) for _ in range(4)]
    bk0 = BootstrappingKeySet(tuple(zeros[:2]), tuple(zeros[2:]))
    ct = LweCiphertext(rng.integers(0, p.q_prime, 2), b, p.q_prime, p.t)
    assert blind_rotate_mmpm(ct, v, bk0).decrypt(sk.z) == RlweVector.trivial(v, p.Q).apply(
        phi(b, p.r, p.N)
    ).decrypt(sk.z)


def test_blind_rotate_rejects_wrong_modulus(small):
    p, sk, ek = small
    v = build_test_vector([0] * p.q_prime, p.r, p.N, p.t_out)
    ct = LweCiphertext(np.zeros(p.n, dtype=np.int64), 0, 2 * p.q_prime, p.t)
    with pytest.raises(DomainError):
        blind_rotate_mmpm(ct, v, ek.bk)
    with pytest.raises(DomainError):
        blind_rotate_tfhe(ct, RingElement.zero(64, 8), ek.bk)
    # a non-power-of-two ring dimension cannot even be represented
    with pytest.raises(ParameterError):
        RingElement.zero(48, 8)


def test_blind_rotate_mult_count(small):
    p, sk, ek = small
    v = build_test_vector([0] * p.q_prime, p.r, p.N, p.t_out)
    ct = LweCiphertext(np.arange(p.n), 5, p.q_prime, p.t)
    with count_ring_mults() as c:
        blind_rotate_mmpm(ct, v, ek.bk)
    assert c.count == 8 * p.n * p.r * p.l_B


# -- end to end ----------------------------------------------------------------------

def test_boot_identity_negacyclic(small):
    p, sk, ek = small
    t = p.t
    f = negacyclic_lift(LookUpTable(tuple(range(t // 2)), t))
    rng = np.random.default_rng(9)
    for _ in range(100):
        m = int(rng.integers(0, t))
        out = boot_mmpm(lwe_encrypt(m, sk.s, p.q, t, p.sigma_enc, rng), f, ek)
        assert out.q == p.q and out.n == p.n
        assert lwe_decrypt(out, sk.s) == f(m)


def test_boot_mp(small):
    p, sk, ek = small
    f = mp_table(p.t // 2)  # on Z_8: -2 on [-2, 2), 2 elsewhere
    rng = np.random.default_rng(10)
    for m in range(p.t):
        out = boot_mmpm(lwe_encrypt(m, sk.s, p.q, p.t, p.sigma_enc, rng), f, ek)
        y = m if m < 4 else m - 8
        assert lwe_decrypt(out, sk.s) == (-2 if -2 <= y < 2 else 2) % 8


def test_boot_composes(small):
    p, sk, ek = small
    rng = np.random.default_rng(11)
    f = random_negacyclic(rng, p.t, p.t)
    g = random_negacyclic(rng, p.t, p.t)
    for m in range(p.t):
        ct = lwe_encrypt(m, sk.s, p.q, p.t, p.sigma_enc, rng)
        out = boot_mmpm(boot_mmpm(ct, f, ek), g, ek)
        assert lwe_decrypt(out, sk.s) == g(f(m))


def test_extract_msb(small):
    p, sk, ek = small
    rng = np.random.default_rng(12)
    for m in range(2 * p.t):
        ct = lwe_encrypt(m, sk.s, p.q, 2 * p.t, p.sigma_enc, rng)
        assert lwe_decrypt(extract_msb(ct, ek), sk.s) == (p.t if m >= p.t else 0)


def test_boot_general_identity_and_random(small):
    p, sk, ek = small
    rng = np.random.default_rng(13)
    ident = LookUpTable.identity(p.t)
    table = LookUpTable(tuple(int(x) for x in rng.integers(0, p.t_out, p.t)), p.t_out)
    for f in (ident, table):
        for _ in range(50):
            m = int(rng.integers(0, p.t))
            out = boot_general(lwe_encrypt(m, sk.s, p.q, 2 * p.t, p.sigma_enc, rng), f, ek)
            assert lwe_decrypt(out, sk.s) == f(m)
    with pytest.raises(DomainError):
        boot_general(lwe_encrypt(0, sk.s, p.q, p.t, p.sigma_enc, rng), ident, ek)


def test_boot_general_mult_count(small):
    p, sk, ek = small
    ct = lwe_encrypt(3, sk.s, p.q, 2 * p.t, p.sigma_enc, np.random.default_rng(0))
    with count_ring_mults() as c:
        boot_general(ct, LookUpTable.identity(p.t), ek)
    assert c.count == 2 * 8 * p.n * p.r * p.l_B


def test_output_independent_of_error(small):
    p, sk, ek = small
    rng = np.random.default_rng(14)
    f = random_negacyclic(rng, p.t, p.t)
    delta = p.q // p.t
    for m in range(p.t):
        outs = set()
        for e in (-delta // 4, -3, 0, 5, delta // 4):
            ct = lwe_encrypt(m, sk.s, p.q, p.t, 0, rng)
            ct = LweCiphertext(ct.a, (ct.b + e) % p.q, p.q, p.t)
            outs.add(lwe_decrypt(boot_mmpm(ct, f, ek), sk.s))
        assert outs == {f(m)}


def test_wrong_scheme_and_table_size(small):
    p, sk, ek = small
    ct = lwe_encrypt(1, sk.s, p.q, p.t, p.sigma_enc, np.random.default_rng(0))
    with pytest.raises(ParameterError):
        boot_tfhe(ct, mp_table(4), ek)
    with pytest.raises(DomainError):
        boot_mmpm(ct, mp_table(8), ek)


# -- TFHE baseline ----------------------------------------------------------------------

def test_tfhe_test_polynomial():
    table = [1, 2, 3, 4, 7, 6, 5, 4]
    tp = tfhe_test_polynomial(table, 8)
    # sum f(i) x^{-i}: coefficient a holds f(-a) = -f(N - a)
    assert [int(c) for c in tp.coeffs] == [1, 4, 5, 6]
    v = build_test_vector(table, 1, 4, 8)
    assert tp == v.entries[0]


def test_tfhe_matches_mmpm_at_r1():
    p = get_preset("desk-r1")
    sk, ek = keygen(p, np.random.default_rng(200))
    sk2, ek2 = keygen(p.as_tfhe(), np.random.default_rng(200))
    assert np.array_equal(ek.bk.plus[0].rows, ek2.bk.plus[0].rows)
    rng = np.random.default_rng(15)
    f = random_negacyclic(rng, p.t, p.t_out)
    table = negacyclic_extend(f, p.q_prime)
    v = build_test_vector(table, 1, p.N, p.t_out)
    for _ in range(5):
        m = int(rng.integers(0, p.t))
        ct = modulus_switch(lwe_encrypt(m, sk.s, p.q, p.t, p.sigma_enc, rng), p.q_prime)
        acc = blind_rotate_mmpm(ct, v, ek.bk)
        acc2 = blind_rotate_tfhe(ct, tfhe_test_polynomial(table, p.t_out), ek2.bk)
        assert np.array_equal(acc.a[0], acc2.a.coeffs) and np.array_equal(acc.b[0], acc2.b.coeffs)


def test_tfhe_counts_and_agreement(small):
    p, sk, ek = small
    pt = p.as_tfhe()
    sk2, ek2 = keygen(pt, np.random.default_rng(100))
    assert np.array_equal(sk.s.s, sk2.s.s)
    rng = np.random.default_rng(16)
    f = random_negacyclic(rng, p.t, p.t_out)
    for _ in range(10):
        m = int(rng.integers(0, p.t))
        ct = lwe_encrypt(m, sk.s, p.q, p.t, p.sigma_enc, rng)
        with count_ring_mults() as c:
            out = functional_bootstrap(ct, f, ek2)
        assert c.count == 8 * p.n * pt.l_B
        assert lwe_decrypt(out, sk.s) == lwe_decrypt(boot_mmpm(ct, f, ek), sk.s) == f(m)


def test_tiny_preset_works(tiny):
    p, sk, ek = tiny
    rng = np.random.default_rng(17)
    f = random_negacyclic(rng, p.t, p.t_out)
    for m in range(p.t):
        out = boot_mmpm(lwe_encrypt(m, sk.s, p.q, p.t, p.sigma_enc, rng), f, ek)
        assert lwe_decrypt(out, sk.s) == f(m)
