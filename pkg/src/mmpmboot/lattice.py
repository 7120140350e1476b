"""LWE, RLWE and RGSW ciphertexts (symmetric key).

Conventions: an LWE ciphertext (a, b) has phase b - <a, s> mod q; an RLWE
ciphertext (a, b) has phase b - a*z.  An RGSW ciphertext is a (2*l_B) x 2
matrix whose rows are RLWE ciphertexts (a_i, b_i): the first l_B rows carry
the plaintext on the a side, the last l_B rows on the b side, so that
g^{-1}(a, b) * C encrypts the product of the two plaintexts.
"""

from __future__ import annotations

import dataclasses
import functools
import math

import numpy as np

from .params import gadget_length
from .ring import (
    ParameterError,
    RingElement,
    centered,
    coeff_dtype,
    ntt_forward,
    ntt_inverse,
    record_ring_mults,
    rotate,
)


class DomainError(ValueError):
    """Input outside the domain an operation is defined on."""


def round_div(x, num: int, den: int):
    """floor(x * num / den + 1/2) for nonnegative integer arrays; ties go up."""
    x = np.asarray(x)
    if x.dtype != object and (int(np.max(x, initial=0)) * num * 2 + den) >= 2**63:
        x = x.astype(object)
    return (2 * x * num + den) // (2 * den)


# ---------------------------------------------------------------------------
# sampling

@functools.lru_cache(maxsize=64)
def _cdt(sigma: float, tail: float = 12.0):
    bound = max(1, math.ceil(tail * sigma))
    support = np.arange(-bound, bound + 1)
    weights = np.exp(-(support.astype(float) ** 2) / (2 * sigma * sigma))
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    return support, cdf


def sample_gaussian(rng: np.random.Generator, sigma: float, size) -> np.ndarray:
    """Centered discrete Gaussian, rho(x) ~ exp(-x^2 / 2 sigma^2), by CDT inversion."""
    if sigma <= 0:
        return np.zeros(size, dtype=np.int64)
    support, cdf = _cdt(float(sigma))
    idx = np.searchsorted(cdf, rng.random(size), side="right")
    return support[np.minimum(idx, len(support) - 1)]


def sample_ternary(rng: np.random.Generator, size) -> np.ndarray:
    return rng.integers(-1, 2, size=size)


def sample_uniform(rng: np.random.Generator, modulus: int, size) -> np.ndarray:
    if modulus > 2**63:
        raise ParameterError(f"modulus {modulus} exceeds 64-bit sampling range")
    return rng.integers(0, modulus, size=size, dtype=np.int64).astype(coeff_dtype(modulus))


# ---------------------------------------------------------------------------
# gadget

@dataclasses.dataclass(frozen=True)
class GadgetVector:
    B: int
    Q: int

    def __post_init__(self):
        if self.B < 2:
            raise ParameterError(f"gadget base must be >= 2, got {self.B}")

    @property
    def length(self) -> int:
        return gadget_length(self.B, self.Q)

    @property
    def powers(self) -> list[int]:
        return [self.B**i for i in range(self.length)]

    def decompose(self, x) -> np.ndarray:
        """Unsigned base-B digits; new leading axis of size l_B."""
        return gadget_decompose(x, self.B, self.length)

    def recompose(self, digits) -> np.ndarray:
        digits = np.asarray(digits)
        total = np.zeros(digits.shape[1:], dtype=object)
        for i, d in enumerate(digits):
            total = total + d.astype(object) * self.B**i
        return total


def gadget_decompose(x, B: int, length: int) -> np.ndarray:
    """Digits d_0..d_{l-1} in [0, B) with sum d_i B^i = x, stacked on axis 0."""
    x = np.asarray(x)
    digits = []
    for _ in range(length):
        digits.append(x % B)
        x = x // B
    return np.stack(digits)


# ---------------------------------------------------------------------------
# LWE

@dataclasses.dataclass(frozen=True)
class LweSecret:
    s: np.ndarray

    def __post_init__(self):
        s = np.array(self.s, dtype=np.int64)
        if not np.all(np.isin(s, (-1, 0, 1))):
            raise DomainError("LWE secret must be ternary")
        s.setflags(write=False)
        object.__setattr__(self, "s", s)

    @property
    def n(self) -> int:
        return len(self.s)

    @property
    def norm2(self) -> int:
        """Squared Euclidean norm."""
        return int(np.sum(self.s * self.s))

    @classmethod
    def generate(cls, n: int, rng: np.random.Generator) -> LweSecret:
        return cls(sample_ternary(rng, n))


@dataclasses.dataclass(frozen=True, eq=False)
class LweCiphertext:
    a: np.ndarray
    b: int
    q: int
    t: int

    def __post_init__(self):
        a = np.array(self.a, dtype=coeff_dtype(self.q)) % self.q
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", int(self.b) % self.q)

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def delta(self) -> int:
        return self.q // self.t

    def _check(self, other: LweCiphertext) -> None:
        if (self.n, self.q) != (other.n, other.q):
            raise ParameterError("LWE ciphertexts have different dimension or modulus")

    def __add__(self, other: LweCiphertext) -> LweCiphertext:
        self._check(other)
        return LweCiphertext(self.a + other.a, self.b + other.b, self.q, self.t)

    def __sub__(self, other: LweCiphertext) -> LweCiphertext:
        self._check(other)
        return LweCiphertext(self.a - other.a, self.b - other.b, self.q, self.t)

    def __neg__(self) -> LweCiphertext:
        return LweCiphertext(-self.a, -self.b, self.q, self.t)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LweCiphertext):
            return NotImplemented
        return (self.q, self.t, self.b) == (other.q, other.t, other.b) and np.array_equal(
            self.a, other.a
        )

    def with_plaintext_modulus(self, t: int) -> LweCiphertext:
        return LweCiphertext(self.a, self.b, self.q, t)


def lwe_trivial(m: int, n: int, q: int, t: int) -> LweCiphertext:
    """(0^n, m*floor(q/t)); decrypts to m under every secret."""
    return LweCiphertext(np.zeros(n, dtype=coeff_dtype(q)), (m % t) * (q // t), q, t)


def lwe_encrypt(
    m: int,
    s: LweSecret,
    q: int,
    t: int,
    sigma: float,
    rng: np.random.Generator,
) -> LweCiphertext:
    if not 0 <= m < t:
        raise DomainError(f"plaintext {m} not in Z_{t}")
    a = sample_uniform(rng, q, s.n)
    e = int(sample_gaussian(rng, sigma, 1)[0])
    return encrypt_raw(m * (q // t) + e, s, q, t, a=a)


def encrypt_raw(value: int, s: LweSecret, q: int, t: int, *, a) -> LweCiphertext:
    """LWE ciphertext with given mask whose phase is exactly `value`."""
    a = np.asarray(a) % q
    b = (int(value) + _dot(a, s.s, q)) % q
    return LweCiphertext(a, b, q, t)


def _dot(a, s, q: int) -> int:
    return int(sum(int(x) * int(y) for x, y in zip(a, s))) % q


def lwe_phase(ct: LweCiphertext, s: LweSecret) -> int:
    if ct.n != s.n:
        raise ParameterError(f"dimension mismatch: ciphertext {ct.n}, secret {s.n}")
    return (ct.b - _dot(ct.a, s.s, ct.q)) % ct.q


def decode(phase: int, q: int, t: int) -> int:
    """Nearest multiple of floor(q/t), ties upward, reduced mod t."""
    delta = q // t
    c = int(centered(phase, q))
    return ((2 * c + delta) // (2 * delta)) % t


def lwe_decrypt(ct: LweCiphertext, s: LweSecret) -> int:
    return decode(lwe_phase(ct, s), ct.q, ct.t)


def lwe_error(ct: LweCiphertext, s: LweSecret, m: int) -> int:
    """Centered phase minus the encoding of m."""
    return int(centered(lwe_phase(ct, s) - (m % ct.t) * ct.delta, ct.q))


# ---------------------------------------------------------------------------
# RLWE

@dataclasses.dataclass(frozen=True)
class RingSecret:
    z: RingElement

    @property
    def N(self) -> int:
        return self.z.N

    @property
    def Q(self) -> int:
        return self.z.Q

    @classmethod
    def generate(cls, N: int, Q: int, rng: np.random.Generator) -> RingSecret:
        return cls(RingElement(sample_ternary(rng, N), Q))

    def extraction_secret(self) -> LweSecret:
        """Coefficient vector (z_0, ..., z_{N-1}) for extracted LWE ciphertexts."""
        return LweSecret(self.z.centered())

    @functools.cached_property
    def ntt(self) -> np.ndarray:
        return ntt_forward(self.z.coeffs, self.Q)


@dataclasses.dataclass(frozen=True, eq=False)
class RlweCiphertext:
    a: RingElement
    b: RingElement
    t: int

    def __post_init__(self):
        self.a._check(self.b)

    @property
    def N(self) -> int:
        return self.a.N

    @property
    def Q(self) -> int:
        return self.a.Q

    def __add__(self, other: RlweCiphertext) -> RlweCiphertext:
        return RlweCiphertext(self.a + other.a, self.b + other.b, self.t)

    def __sub__(self, other: RlweCiphertext) -> RlweCiphertext:
        return RlweCiphertext(self.a - other.a, self.b - other.b, self.t)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RlweCiphertext):
            return NotImplemented
        return self.t == other.t and self.a == other.a and self.b == other.b

    def rotate(self, k: int) -> RlweCiphertext:
        return RlweCiphertext(
            RingElement(rotate(self.a.coeffs, k, self.Q), self.Q),
            RingElement(rotate(self.b.coeffs, k, self.Q), self.Q),
            self.t,
        )


def _ring_times_secret(a: np.ndarray, z: RingSecret) -> np.ndarray:
    """a*z over the last axis (batched); one ring multiplication per polynomial."""
    Q = z.Q
    record_ring_mults(int(np.prod(a.shape[:-1], dtype=np.int64)))
    return ntt_inverse(ntt_forward(a, Q) * z.ntt % Q, Q)


def rlwe_trivial(m: RingElement, t: int, Q: int | None = None) -> RlweCiphertext:
    """(0, m*floor(Q/t)); m is read as a polynomial with coefficients mod t."""
    Q = Q or m.Q
    delta = Q // t
    coeffs = np.array([int(c) % t * delta for c in centered(m.coeffs, m.Q)], dtype=object)
    body = RingElement(coeffs % Q, Q)
    return RlweCiphertext(RingElement.zero(m.N, Q), body, t)


def rlwe_encrypt_raw(
    phase: np.ndarray, z: RingSecret, sigma: float, rng: np.random.Generator, t: int
) -> RlweCiphertext:
    """Fresh RLWE ciphertext with phase `phase` + Gaussian error."""
    Q, N = z.Q, z.N
    a = sample_uniform(rng, Q, N)
    e = sample_gaussian(rng, sigma, N)
    b = (_ring_times_secret(a, z) + np.asarray(phase) + e) % Q
    return RlweCiphertext(RingElement(a, Q), RingElement(b, Q), t)


def rlwe_encrypt(
    m: RingElement, z: RingSecret, t: int, sigma: float, rng: np.random.Generator
) -> RlweCiphertext:
    """Encrypt a plaintext polynomial with coefficients read mod t."""
    Q = z.Q
    delta = Q // t
    scaled = np.array([int(c) % t * delta for c in centered(m.coeffs, m.Q)], dtype=object) % Q
    return rlwe_encrypt_raw(scaled.astype(coeff_dtype(Q)), z, sigma, rng, t)


def rlwe_phase(ct: RlweCiphertext, z: RingSecret) -> RingElement:
    if (ct.N, ct.Q) != (z.N, z.Q):
        raise ParameterError("RLWE ciphertext and secret live in different rings")
    az = _ring_times_secret(ct.a.coeffs, z)
    return RingElement(ct.b.coeffs - az, ct.Q)


def rlwe_decrypt(ct: RlweCiphertext, z: RingSecret) -> RingElement:
    """Plaintext polynomial with coefficients in [0, t) (as a RingElement mod t)."""
    phase = rlwe_phase(ct, z)
    decoded = [decode(int(c), ct.Q, ct.t) for c in phase.coeffs]
    return RingElement(decoded, ct.t)


def rlwe_error(ct: RlweCiphertext, z: RingSecret, m: RingElement) -> np.ndarray:
    delta = ct.Q // ct.t
    phase = rlwe_phase(ct, z).coeffs.astype(object)
    expected = np.array([int(c) % ct.t * delta for c in m.coeffs], dtype=object)
    return centered((phase - expected) % ct.Q, ct.Q)


# ---------------------------------------------------------------------------
# RGSW

@dataclasses.dataclass(frozen=True, eq=False)
class RgswCiphertext:
    """rows[i] = (a_i, b_i); shape (2*l_B, 2, N)."""

    rows: np.ndarray
    B: int
    Q: int

    def __post_init__(self):
        rows = np.array(self.rows, dtype=coeff_dtype(self.Q)) % self.Q
        l_B = gadget_length(self.B, self.Q)
        if rows.ndim != 3 or rows.shape[:2] != (2 * l_B, 2):
            raise ParameterError(f"RGSW rows must have shape (2*{l_B}, 2, N), got {rows.shape}")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def N(self) -> int:
        return self.rows.shape[-1]

    @property
    def l_B(self) -> int:
        return self.rows.shape[0] // 2

    @functools.cached_property
    def ntt_rows(self) -> np.ndarray:
        return ntt_forward(self.rows, self.Q)

    def row(self, i: int, t: int) -> RlweCiphertext:
        return RlweCiphertext(
            RingElement(self.rows[i, 0], self.Q), RingElement(self.rows[i, 1], self.Q), t
        )


def _check_rgsw_plaintext(m: RingElement) -> None:
    c = m.centered()
    nz = np.flatnonzero(c)
    if len(nz) > 1 or (len(nz) == 1 and abs(int(c[nz[0]])) != 1):
        raise DomainError("RGSW plaintext must be 0 or a signed monic monomial")


def _as_ring(m, N: int, Q: int) -> RingElement:
    if isinstance(m, RingElement):
        return m
    return RingElement.monomial(0, N, Q, scale=int(m))


def _gadget_plaintext_rows(m: RingElement, B: int, l_B: int) -> np.ndarray:
    Q, N = m.Q, m.N
    rows = np.zeros((2 * l_B, 2, N), dtype=coeff_dtype(Q))
    for i in range(l_B):
        scaled = m.coeffs.astype(object) * B**i % Q
        rows[i, 0] = scaled
        rows[l_B + i, 1] = scaled
    return rows


def rgsw_trivial(m, N: int, Q: int, B: int) -> RgswCiphertext:
    """m * diag(g_B, g_B); error-free."""
    m = _as_ring(m, N, Q)
    _check_rgsw_plaintext(m)
    return RgswCiphertext(_gadget_plaintext_rows(m, B, gadget_length(B, Q)), B, Q)


def rgsw_encrypt(
    m, z: RingSecret, B: int, sigma: float, rng: np.random.Generator
) -> RgswCiphertext:
    """Each row is a fresh RLWE encryption of zero plus the gadget rows of m."""
    N, Q = z.N, z.Q
    m = _as_ring(m, N, Q)
    _check_rgsw_plaintext(m)
    l_B = gadget_length(B, Q)
    a = sample_uniform(rng, Q, (2 * l_B, N))
    e = sample_gaussian(rng, sigma, (2 * l_B, N))
    b = (_ring_times_secret(a, z) + e) % Q
    rows = np.stack([a, b], axis=1) + _gadget_plaintext_rows(m, B, l_B)
    return RgswCiphertext(rows % Q, B, Q)


def external_product_arrays(a: np.ndarray, b: np.ndarray, C: RgswCiphertext):
    """g^{-1}(a, b) * C for batches of RLWE ciphertexts given as coefficient arrays.

    a, b have shape (..., N).  Each ciphertext costs 4*l_B ring multiplications.
    """
    Q, B, l_B = C.Q, C.B, C.l_B
    digits = np.concatenate(
        (gadget_decompose(a, B, l_B), gadget_decompose(b, B, l_B)), axis=0
    )  # (2 l_B, ..., N)
    digits = np.moveaxis(digits, 0, -2)  # (..., 2 l_B, N)
    batch = int(np.prod(digits.shape[:-2], dtype=np.int64))
    record_ring_mults(batch * 4 * l_B)
    d_ntt = ntt_forward(digits, Q)
    rows = C.ntt_rows  # (2 l_B, 2, N)
    acc = None
    for i in range(2 * l_B):
        term = d_ntt[..., i, None, :] * rows[i] % Q  # (..., 2, N)
        acc = term if acc is None else (acc + term) % Q
    out = ntt_inverse(acc, Q)
    return out[..., 0, :], out[..., 1, :]


def _check_rgsw_compat(c: RlweCiphertext, C: RgswCiphertext) -> None:
    if (c.N, c.Q) != (C.N, C.Q):
        raise ParameterError(
            f"RLWE (N={c.N}, Q={c.Q}) and RGSW (N={C.N}, Q={C.Q}) parameters differ"
        )


def rlwe_rgsw_mul(c: RlweCiphertext, C: RgswCiphertext) -> RlweCiphertext:
    _check_rgsw_compat(c, C)
    a, b = external_product_arrays(c.a.coeffs, c.b.coeffs, C)
    return RlweCiphertext(RingElement(a, C.Q), RingElement(b, C.Q), c.t)


def rgsw_rgsw_mul(C1: RgswCiphertext, C2: RgswCiphertext) -> RgswCiphertext:
    """Row-wise external product g^{-1}(C1) * C2."""
    if (C1.N, C1.Q, C1.B) != (C2.N, C2.Q, C2.B):
        raise ParameterError("RGSW parameter mismatch")
    a, b = external_product_arrays(C1.rows[:, 0], C1.rows[:, 1], C2)
    return RgswCiphertext(np.stack([a, b], axis=1), C2.B, C2.Q)


def rgsw_phase(C: RgswCiphertext, z: RingSecret) -> np.ndarray:
    """Per-row phases b_i - a_i z, shape (2 l_B, N)."""
    return (C.rows[:, 1] - _ring_times_secret(C.rows[:, 0], z)) % C.Q
