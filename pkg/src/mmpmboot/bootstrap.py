"""Functional bootstrapping with polynomial-vector test vectors (BootMMPM)
and the single-ring TFHE baseline."""

from __future__ import annotations

import dataclasses
import math
import warnings
from collections.abc import Callable, Sequence

import numpy as np

from .lattice import (
    DomainError,
    LweCiphertext,
    LweSecret,
    RgswCiphertext,
    RingSecret,
    RlweCiphertext,
    external_product_arrays,
    lwe_trivial,
    rgsw_encrypt,
    rlwe_decrypt,
    rlwe_phase,
)
from .mmpm import Mmpm, TestVector, apply_to_arrays, build_test_vector, check_negacyclic, phi
from .params import ParameterSet
from .ring import ParameterError, RingElement, coeff_dtype, rotate
from .switching import KeySwitchKey, gen_ksk, key_switch, modulus_switch, sample_extract


# ---------------------------------------------------------------------------
# look-up tables


@dataclasses.dataclass(frozen=True)
class LookUpTable:
    """f: Z_t -> Z_{t_out} as a list of t values reduced mod t_out."""

    values: tuple[int, ...]
    t_out: int

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) % self.t_out for v in self.values))

    @property
    def t(self) -> int:
        return len(self.values)

    @property
    def nega_cyclic(self) -> bool:
        return self.t % 2 == 0 and check_negacyclic(self.values, self.t_out) is None

    def __call__(self, m: int) -> int:
        return self.values[m % self.t]

    @classmethod
    def from_function(cls, fn: Callable[[int], int], t: int, t_out: int) -> LookUpTable:
        return cls(tuple(fn(m) for m in range(t)), t_out)

    @classmethod
    def identity(cls, t: int) -> LookUpTable:
        return cls(tuple(range(t)), t)


def mp_table(t: int) -> LookUpTable:
    """mp on Z_{2t} read as [-t, t): -t/2 on [-t/2, t/2), t/2 elsewhere."""
    def mp(x: int) -> int:
        y = x if x < t else x - 2 * t
        return -t // 2 if -t // 2 <= y < t // 2 else t // 2

    return LookUpTable.from_function(mp, 2 * t, 2 * t)


def msb_table(t: int) -> LookUpTable:
    """mp evaluated at x - t/2: -t/2 when x in [0, t), t/2 when x in [t, 2t)."""
    mp = mp_table(t)
    return LookUpTable.from_function(lambda x: mp((x - t // 2) % (2 * t)), 2 * t, 2 * t)


def negacyclic_lift(f: LookUpTable) -> LookUpTable:
    """Extension of f from [0, t) to Z_2t by F(x + t) = -F(x)."""
    t = f.t
    return LookUpTable(tuple(f(x) if x < t else -f(x - t) for x in range(2 * t)), f.t_out)


def negacyclic_extend(f: LookUpTable, q_prime: int) -> list[int]:
    """Table f' on Z_{q'} with f'(m*floor(q'/t) + e) = f(m) for 2|e| < floor(q'/t).

    The lower half uses the nearest plateau (ties to the lower one); the upper
    half is the negation of the lower half, so f'(x + q'/2) = -f'(x).
    """
    if not f.nega_cyclic:
        raise DomainError("look-up table is not nega-cyclic")
    t = f.t
    if q_prime < 2 * t or q_prime % 2:
        raise DomainError(f"q'={q_prime} must be even and at least 2t={2 * t}")
    delta = q_prime // t
    half = q_prime // 2
    lower = [f(((2 * x + delta - 1) // (2 * delta)) % t) for x in range(half)]
    return lower + [(-v) % f.t_out for v in lower]


# ---------------------------------------------------------------------------
# keys


@dataclasses.dataclass(frozen=True)
class BootstrappingKeySet:
    """RGSW encryptions of s_k+ = max(s_k, 0) and s_k- = max(-s_k, 0)."""

    plus: tuple[RgswCiphertext, ...]
    minus: tuple[RgswCiphertext, ...]

    def __post_init__(self):
        if len(self.plus) != len(self.minus):
            raise ParameterError("bootstrapping key halves differ in length")

    @property
    def n(self) -> int:
        return len(self.plus)

    @property
    def N(self) -> int:
        return self.plus[0].N if self.plus else 0

    @property
    def Q(self) -> int:
        return self.plus[0].Q


@dataclasses.dataclass(frozen=True)
class SecretKeys:
    s: LweSecret
    z: RingSecret


@dataclasses.dataclass(frozen=True)
class EvaluationKeys:
    params: ParameterSet
    bk: BootstrappingKeySet
    ksk: KeySwitchKey


def keygen(params: ParameterSet, rng: np.random.Generator) -> tuple[SecretKeys, EvaluationKeys]:
    params.validate()
    s = LweSecret.generate(params.n, rng)
    z = RingSecret.generate(params.ring_dim, params.Q, rng)
    plus, minus = [], []
    for sk in s.s:
        plus.append(rgsw_encrypt(max(int(sk), 0), z, params.B, params.sigma_boot, rng))
        minus.append(rgsw_encrypt(max(-int(sk), 0), z, params.B, params.sigma_boot, rng))
    bk = BootstrappingKeySet(tuple(plus), tuple(minus))
    ksk = gen_ksk(z, s, params.B_ks, params.sigma_ks, rng)
    return SecretKeys(s, z), EvaluationKeys(params, bk, ksk)


# ---------------------------------------------------------------------------
# RLWE vectors


@dataclasses.dataclass(frozen=True, eq=False)
class RlweVector:
    """r RLWE ciphertexts stored as two (r, N) coefficient arrays."""

    a: np.ndarray
    b: np.ndarray
    Q: int
    t: int

    def __post_init__(self):
        if self.a.shape != self.b.shape or self.a.ndim != 2:
            raise ParameterError("RLWE vector parts must both have shape (r, N)")

    @property
    def r(self) -> int:
        return self.a.shape[0]

    @property
    def N(self) -> int:
        return self.a.shape[1]

    @property
    def entries(self) -> list[RlweCiphertext]:
        return [
            RlweCiphertext(RingElement(a, self.Q), RingElement(b, self.Q), self.t)
            for a, b in zip(self.a, self.b)
        ]

    @classmethod
    def trivial(cls, v: TestVector, Q: int) -> RlweVector:
        """(0, v * floor(Q/t_out)) entrywise; error-free."""
        scale = Q // v.t_out
        body = (v.coeff_array().astype(object) * scale % Q).astype(coeff_dtype(Q))
        return cls(np.zeros_like(body), body, Q, v.t_out)

    def apply(self, A: Mmpm) -> RlweVector:
        """Plaintext matrix times RLWE vector; error norms are unchanged."""
        return RlweVector(
            apply_to_arrays(A, self.a, self.Q), apply_to_arrays(A, self.b, self.Q), self.Q, self.t
        )

    def __add__(self, other: RlweVector) -> RlweVector:
        return RlweVector((self.a + other.a) % self.Q, (self.b + other.b) % self.Q, self.Q, self.t)

    def __sub__(self, other: RlweVector) -> RlweVector:
        return RlweVector((self.a - other.a) % self.Q, (self.b - other.b) % self.Q, self.Q, self.t)

    def times_rgsw(self, C: RgswCiphertext) -> RlweVector:
        """Entrywise external product: r * 4 * l_B ring multiplications."""
        if (self.N, self.Q) != (C.N, C.Q):
            raise ParameterError("RLWE vector and RGSW ciphertext parameters differ")
        a, b = external_product_arrays(self.a, self.b, C)
        return RlweVector(a, b, self.Q, self.t)

    def decrypt(self, z: RingSecret) -> list[RingElement]:
        return [rlwe_decrypt(e, z) for e in self.entries]

    def phases(self, z: RingSecret) -> list[RingElement]:
        return [rlwe_phase(e, z) for e in self.entries]


def cmux_rlwe_vector(
    c_plus: RgswCiphertext, c_minus: RgswCiphertext, a_k: int, acc: RlweVector
) -> RlweVector:
    """acc + (Phi(-a_k) acc - acc) [x] c_plus + (Phi(a_k) acc - acc) [x] c_minus."""
    r, N = acc.r, acc.N
    down = acc.apply(phi(-a_k, r, N)) - acc
    up = acc.apply(phi(a_k, r, N)) - acc
    return acc + down.times_rgsw(c_plus) + up.times_rgsw(c_minus)


def blind_rotate_mmpm(
    ct: LweCiphertext, v_test: TestVector, bk: BootstrappingKeySet, Q: int | None = None
) -> RlweVector:
    """Accumulator encrypting Phi(phase(ct)) * v_test * floor(Q/t_out)."""
    N, r = v_test.N, v_test.r
    if ct.q != 2 * N * r:
        raise DomainError(f"ciphertext modulus {ct.q} must equal 2Nr={2 * N * r}")
    if ct.n != bk.n:
        raise ParameterError(f"ciphertext dimension {ct.n} != key count {bk.n}")
    if bk.n and bk.N != N:
        raise ParameterError(f"bootstrapping keys have ring dimension {bk.N}, expected {N}")
    Q = Q or bk.Q
    acc = RlweVector.trivial(v_test, Q).apply(phi(ct.b, r, N))
    for k in range(bk.n):
        acc = cmux_rlwe_vector(bk.plus[k], bk.minus[k], int(ct.a[k]), acc)
    return acc


def boot_mmpm(ct: LweCiphertext, f: LookUpTable, keys: EvaluationKeys) -> LweCiphertext:
    """Bootstrap ct (plaintext in Z_t) to an encryption of f(m) in Z_{t_out} mod q."""
    p = keys.params
    if p.scheme != "mmpm":
        raise ParameterError(f"boot_mmpm needs an mmpm parameter set, got {p.scheme}")
    if ct.t != f.t:
        raise DomainError(f"ciphertext plaintext modulus {ct.t} != table size {f.t}")
    if p.r != math.ceil(ct.q / (2 * p.N)):
        warnings.warn(f"r={p.r} differs from ceil(q/2N) for q={ct.q}", stacklevel=2)
    q_prime = p.q_prime
    ct1 = modulus_switch(ct, q_prime)
    v_test = build_test_vector(negacyclic_extend(f, q_prime), p.r, p.N, f.t_out)
    acc = blind_rotate_mmpm(ct1, v_test, keys.bk, p.Q)
    first = RlweCiphertext(RingElement(acc.a[0], p.Q), RingElement(acc.b[0], p.Q), f.t_out)
    return _finish(sample_extract(first), keys, ct.q)


def _finish(extracted: LweCiphertext, keys: EvaluationKeys, q: int) -> LweCiphertext:
    return modulus_switch(key_switch(extracted, keys.ksk), q)


# ---------------------------------------------------------------------------
# TFHE baseline


def tfhe_test_polynomial(table: Sequence[int], t_out: int) -> RingElement:
    """sum_{i in [N]} f'(i) x^{-i} for a table of length 2N."""
    N = len(table) // 2
    coeffs = [0] * N
    coeffs[0] = int(table[0])
    for i in range(1, N):
        coeffs[N - i] = -int(table[i])  # x^{-i} = -x^{N-i}
    return RingElement(coeffs, t_out)


def blind_rotate_tfhe(
    ct: LweCiphertext, test_poly: RingElement, bk: BootstrappingKeySet, Q: int | None = None
) -> RlweCiphertext:
    """Standard CMux accumulation in one ring of dimension N' (a power of two)."""
    N = test_poly.N
    if N & (N - 1):
        raise DomainError(f"ring dimension {N} must be a power of two")
    if ct.q != 2 * N:
        raise DomainError(f"ciphertext modulus {ct.q} must equal 2N'={2 * N}")
    if ct.n != bk.n:
        raise ParameterError(f"ciphertext dimension {ct.n} != key count {bk.n}")
    Q = Q or bk.Q
    t_out = test_poly.Q
    scale = Q // t_out
    body = (test_poly.coeffs.astype(object) * scale % Q).astype(coeff_dtype(Q))
    a = np.zeros(N, dtype=coeff_dtype(Q))
    b = rotate(body, ct.b, Q)
    for k in range(bk.n):
        ak = int(ct.a[k])
        da, db = (rotate(a, -ak, Q) - a) % Q, (rotate(b, -ak, Q) - b) % Q
        ua, ub = (rotate(a, ak, Q) - a) % Q, (rotate(b, ak, Q) - b) % Q
        pa, pb = external_product_arrays(da, db, bk.plus[k])
        ma, mb = external_product_arrays(ua, ub, bk.minus[k])
        a = (a + pa + ma) % Q
        b = (b + pb + mb) % Q
    return RlweCiphertext(RingElement(a, Q), RingElement(b, Q), t_out)


def boot_tfhe(ct: LweCiphertext, f: LookUpTable, keys: EvaluationKeys) -> LweCiphertext:
    p = keys.params
    if p.scheme != "tfhe":
        raise ParameterError(f"boot_tfhe needs a tfhe parameter set, got {p.scheme}")
    if ct.t != f.t:
        raise DomainError(f"ciphertext plaintext modulus {ct.t} != table size {f.t}")
    q_prime = 2 * p.ring_dim
    ct1 = modulus_switch(ct, q_prime)
    test_poly = tfhe_test_polynomial(negacyclic_extend(f, q_prime), f.t_out)
    acc = blind_rotate_tfhe(ct1, test_poly, keys.bk, p.Q)
    return _finish(sample_extract(acc), keys, ct.q)


def functional_bootstrap(ct: LweCiphertext, f: LookUpTable, keys: EvaluationKeys) -> LweCiphertext:
    """Nega-cyclic bootstrap with whichever scheme the keys were made for."""
    if keys.params.scheme == "tfhe":
        return boot_tfhe(ct, f, keys)
    return boot_mmpm(ct, f, keys)


# ---------------------------------------------------------------------------
# arbitrary functions


def extract_msb(ct: LweCiphertext, keys: EvaluationKeys) -> LweCiphertext:
    """Encryption of t * msb(m) in Z_2t, where ct encrypts m in Z_2t.

    One bootstrap with mp (shifted by t/2) followed by adding t/2, since
    t * sign = mp + t/2.
    """
    two_t = ct.t
    t = two_t // 2
    out = functional_bootstrap(ct, msb_table(t), keys)
    return out + lwe_trivial(t // 2, out.n, out.q, two_t)


def boot_general(ct: LweCiphertext, f: LookUpTable, keys: EvaluationKeys) -> LweCiphertext:
    """Evaluate an arbitrary f: Z_t -> Z_t' on ct encrypting m in [0, t) mod 2t.

    Round 1 removes the unknown top bit; round 2 bootstraps with the
    nega-cyclic lift of f to Z_2t.
    """
    if ct.t != 2 * f.t:
        raise DomainError(f"input must be encoded mod 2t={2 * f.t}, got t={ct.t}")
    msb = extract_msb(ct, keys)
    cleared = ct - msb
    return functional_bootstrap(cleared, negacyclic_lift(f), keys)
