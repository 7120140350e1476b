import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmpmboot.lattice import (
    DomainError,
    GadgetVector,
    LweCiphertext,
    LweSecret,
    RingSecret,
    decode,
    encrypt_raw,
    gadget_decompose,
    lwe_decrypt,
    lwe_encrypt,
    lwe_error,
    lwe_phase,
    lwe_trivial,
    rgsw_encrypt,
    rgsw_phase,
    rgsw_rgsw_mul,
    rgsw_trivial,
    rlwe_decrypt,
    rlwe_encrypt,
    rlwe_rgsw_mul,
    rlwe_trivial,
    round_div,
    sample_gaussian,
)
from mmpmboot.params import DESK_Q
from mmpmboot.ring import ParameterError, RingElement, count_ring_mults

import oracles

Q = DESK_Q


def test_round_div_ties_up():
    assert list(round_div(np.array([1, 3, 5]), 1, 2)) == [1, 2, 3]
    assert list(round_div(np.array([100]), 500, 1000)) == [50]


def test_gaussian_sampler_moments():
    rng = np.random.default_rng(0)
    x = sample_gaussian(rng, 3.2, 200_000)
    assert abs(x.mean()) < 0.05
    assert abs(x.var() / 3.2**2 - 1) < 0.02
    assert not sample_gaussian(rng, 0, 10).any()


def test_lwe_roundtrip_all_messages():
    rng = np.random.default_rng(1)
    s = LweSecret.generate(16, rng)
    for _ in range(100):
        m = int(rng.integers(0, 8))
        assert lwe_decrypt(lwe_encrypt(m, s, 512, 8, 1.0, rng), s) == m


def test_lwe_encrypt_rejects_out_of_range():
    s = LweSecret(np.zeros(4, dtype=int))
    with pytest.raises(DomainError):
        lwe_encrypt(8, s, 512, 8, 1.0, np.random.default_rng(0))


def test_error_stays_small():
    rng = np.random.default_rng(2)
    s = LweSecret.generate(16, rng)
    for _ in range(1000):
        m = int(rng.integers(0, 8))
        assert 2 * abs(lwe_error(lwe_encrypt(m, s, 512, 8, 1.0, rng), s, m)) < 64


def test_trivial_decrypts_under_any_secret():
    ct = lwe_trivial(5, 8, 512, 8)
    assert not ct.a.any() and ct.b == 5 * 64
    for seed in range(5):
        s = LweSecret.generate(8, np.random.default_rng(seed))
        assert lwe_phase(ct, s) == 320
        assert lwe_decrypt(ct, s) == 5


def test_phase_matches_dot_product():
    rng = np.random.default_rng(3)
    for _ in range(50):
        s = LweSecret.generate(8, rng)
        ct = LweCiphertext(rng.integers(0, 64, 8), int(rng.integers(0, 64)), 64, 4)
        assert lwe_phase(ct, s) == oracles.lwe_phase(ct.a, ct.b, s.s, 64)
    zero = LweSecret(np.zeros(8, dtype=int))
    assert lwe_phase(ct, zero) == ct.b


def test_phase_dimension_mismatch():
    with pytest.raises(ParameterError):
        lwe_phase(lwe_trivial(0, 4, 64, 4), LweSecret(np.zeros(5, dtype=int)))


def test_decode_boundary():
    # q=512, t=8: delta=64, half=32; ties go up
    assert decode(64 + 31, 512, 8) == 1
    assert decode(64 + 32, 512, 8) == 2
    assert decode(64 - 32, 512, 8) == 1
    assert decode(64 - 33, 512, 8) == 0
    s = LweSecret.generate(16, np.random.default_rng(4))
    ct = encrypt_raw(3 * 64 + 32, s, 512, 8, a=np.arange(16))
    assert lwe_decrypt(ct, s) == 4


@given(st.integers(0, 2**32), st.integers(0, 2**32))
@settings(max_examples=50, deadline=None)
def test_phase_linearity(seed, seed2):
    rng = np.random.default_rng([seed, seed2])
    s = LweSecret.generate(8, rng)
    c1 = LweCiphertext(rng.integers(0, 64, 8), int(rng.integers(0, 64)), 64, 4)
    c2 = LweCiphertext(rng.integers(0, 64, 8), int(rng.integers(0, 64)), 64, 4)
    assert lwe_phase(c1 + c2, s) == (lwe_phase(c1, s) + lwe_phase(c2, s)) % 64


def test_gadget_examples():
    g = GadgetVector(4, 256)
    assert g.length == 4
    assert list(g.decompose(27)) == [3, 2, 1, 0]
    assert not g.decompose(0).any()


@given(st.integers(0, Q - 1), st.sampled_from([2, 3, 25, 2**9, 2**15]))
@settings(max_examples=1000, deadline=None)
def test_gadget_recomposition(x, B):
    g = GadgetVector(B, Q)
    d = g.decompose(x)
    assert all(0 <= int(v) < B for v in d)
    assert int(g.recompose(d)) == x


def test_gadget_batched_axis():
    x = np.arange(12).reshape(3, 4)
    d = gadget_decompose(x, 2, 4)
    assert d.shape == (4, 3, 4)


# -- RLWE / RGSW ---------------------------------------------------------------

N = 16
B = 2**9
T = 16


@pytest.fixture(scope="module")
def z():
    return RingSecret.generate(N, Q, np.random.default_rng(10))


def mono(k, scale=1):
    return RingElement.monomial(k, N, Q, scale)


def small_poly(rng, t=T):
    return RingElement(rng.integers(0, t, N), Q)


def test_rlwe_roundtrip(z):
    rng = np.random.default_rng(11)
    m = small_poly(rng)
    assert rlwe_decrypt(rlwe_encrypt(m, z, T, 3.2, rng), z) == RingElement(m.coeffs, T)


def test_rgsw_trivial_is_gadget_matrix():
    C = rgsw_trivial(1, N, Q, B)
    l_B = C.l_B
    for i in range(l_B):
        assert C.rows[i, 0, 0] == B**i and not C.rows[i, 1].any()
        assert C.rows[l_B + i, 1, 0] == B**i and not C.rows[l_B + i, 0].any()


def test_rgsw_of_zero_rows_encrypt_zero(z):
    C = rgsw_encrypt(0, z, B, 3.2, np.random.default_rng(12))
    ph = oracles.centered
    for row in rgsw_phase(C, z):
        assert max(abs(ph(int(v), Q)) for v in row) < 40


def test_rgsw_plaintext_domain(z):
    with pytest.raises(DomainError):
        rgsw_trivial(2, N, Q, B)
    with pytest.raises(DomainError):
        rgsw_encrypt(mono(0) + mono(1), z, B, 3.2, np.random.default_rng(0))


def test_external_product_identity_and_zero(z):
    rng = np.random.default_rng(13)
    m = small_poly(rng)
    c = rlwe_encrypt(m, z, T, 3.2, rng)
    assert rlwe_decrypt(rlwe_rgsw_mul(c, rgsw_trivial(1, N, Q, B)), z) == RingElement(m.coeffs, T)
    zero = rlwe_decrypt(rlwe_rgsw_mul(c, rgsw_trivial(0, N, Q, B)), z)
    assert not zero.coeffs.any()


def test_monomials_multiply(z):
    rng = np.random.default_rng(14)
    z8 = RingSecret.generate(8, Q, rng)
    c = rlwe_encrypt(RingElement.monomial(2, 8, Q), z8, T, 3.2, rng)
    C = rgsw_encrypt(RingElement.monomial(3, 8, Q), z8, B, 3.2, rng)
    out = rlwe_decrypt(rlwe_rgsw_mul(c, C), z8)
    assert out == RingElement.monomial(5, 8, T)


@given(st.integers(0, 2**32), st.integers(-2 * N, 2 * N), st.sampled_from([1, -1, 0]))
@settings(max_examples=40, deadline=None)
def test_external_product_homomorphism(seed, k, sign):
    rng = np.random.default_rng(seed)
    z = RingSecret.generate(N, Q, rng)
    p = small_poly(rng)
    m = mono(k, sign)
    c = rlwe_encrypt(p, z, T, 3.2, rng)
    out = rlwe_decrypt(rlwe_rgsw_mul(c, rgsw_encrypt(m, z, B, 3.2, rng)), z)
    want = oracles.poly_mul([int(x) for x in p.coeffs], oracles.centered_list(m.coeffs, Q), N, T)
    assert [int(x) for x in out.coeffs] == want


def test_external_product_ring_mult_count(z):
    c = rlwe_trivial(mono(1, 3), T, Q)
    C = rgsw_trivial(1, N, Q, B)
    with count_ring_mults() as counter:
        rlwe_rgsw_mul(c, C)
    assert counter.count == 4 * C.l_B


def test_rgsw_rgsw_product(z):
    # the error of C1 is amplified by the second product; a small base keeps it readable
    rng = np.random.default_rng(15)
    B = 16
    C1 = rgsw_encrypt(mono(3), z, B, 3.2, rng)
    C2 = rgsw_encrypt(mono(4, -1), z, B, 3.2, rng)
    C = rgsw_rgsw_mul(C1, C2)
    c = rlwe_encrypt(mono(1), z, T, 3.2, rng)
    assert rlwe_decrypt(rlwe_rgsw_mul(c, C), z) == RingElement.monomial(8, N, T, -1)
    one = rgsw_trivial(1, N, Q, B)
    assert np.array_equal(rgsw_rgsw_mul(C1, one).rows, C1.rows)
    zero = rgsw_rgsw_mul(C1, rgsw_trivial(0, N, Q, B))
    assert not zero.rows.any()
