"""Exact arithmetic in Z_Q[x]/(x^N + 1).

Coefficients are kept in canonical form [0, Q).  Moduli below 2^31 use int64
numpy arrays (products fit in 63 bits); larger moduli fall back to object
arrays of Python ints, which are slow but exact.
"""

from __future__ import annotations

import contextlib
import contextvars
import dataclasses
import functools
from typing import Iterator

import numpy as np


class ParameterError(ValueError):
    """Raised on incompatible ring or scheme parameters."""


def coeff_dtype(modulus: int):
    return np.int64 if modulus < 2**31 else object


def is_power_of_two(x: int) -> bool:
    return x > 0 and x & (x - 1) == 0


def centered(values, modulus: int):
    """Map residues in [0, modulus) to (-modulus/2, modulus/2]."""
    v = np.asarray(values) % modulus
    return np.where(v > modulus // 2, v - modulus, v)


# ---------------------------------------------------------------------------
# ring multiplication counter

@dataclasses.dataclass
class RingMultCounter:
    count: int = 0


_counter: contextvars.ContextVar[RingMultCounter | None] = contextvars.ContextVar(
    "ring_mult_counter", default=None
)


@contextlib.contextmanager
def count_ring_mults() -> Iterator[RingMultCounter]:
    """Count products in Z_Q[x]/(x^N+1) performed inside the block.

    Counters nest: an inner block does not hide products from outer ones.
    """
    outer = _counter.get()
    counter = RingMultCounter()
    token = _counter.set(counter)
    try:
        yield counter
    finally:
        _counter.reset(token)
        if outer is not None:
            outer.count += counter.count


def record_ring_mults(k: int = 1) -> None:
    c = _counter.get()
    if c is not None:
        c.count += k


# ---------------------------------------------------------------------------
# NTT

def _find_psi(N: int, Q: int) -> int:
    """Smallest primitive 2N-th root of unity mod Q (Q prime, Q = 1 mod 2N)."""
    order = 2 * N
    if (Q - 1) % order:
        raise ParameterError(f"Q={Q} is not 1 mod 2N={order}; no negacyclic NTT")
    exponent = (Q - 1) // order
    for g in range(2, Q):
        psi = pow(g, exponent, Q)
        # psi has order dividing 2N; it is primitive iff psi^N = -1
        if pow(psi, N, Q) == Q - 1:
            return psi
    raise ParameterError(f"no primitive 2N-th root of unity mod {Q}")


def _bit_reverse(N: int) -> np.ndarray:
    bits = N.bit_length() - 1
    idx = np.arange(N)
    rev = np.zeros(N, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


@dataclasses.dataclass(frozen=True)
class NttTables:
    N: int
    Q: int
    psi_pows: np.ndarray
    psi_inv_pows: np.ndarray
    stage_twiddles: tuple
    stage_twiddles_inv: tuple
    rev: np.ndarray
    n_inv: int


@functools.lru_cache(maxsize=None)
def ntt_tables(N: int, Q: int) -> NttTables:
    if not is_power_of_two(N):
        raise ParameterError(f"N={N} must be a power of two")
    dtype = coeff_dtype(Q)
    psi = _find_psi(N, Q)
    psi_inv = pow(psi, Q - 2, Q)
    omega = psi * psi % Q
    omega_inv = psi_inv * psi_inv % Q

    def powers(base: int, count: int) -> np.ndarray:
        out = [1] * count
        for i in range(1, count):
            out[i] = out[i - 1] * base % Q
        return np.array(out, dtype=dtype)

    stages, stages_inv = [], []
    length = 2
    while length <= N:
        stages.append(powers(pow(omega, N // length, Q), length // 2))
        stages_inv.append(powers(pow(omega_inv, N // length, Q), length // 2))
        length *= 2
    tables = NttTables(
        N=N,
        Q=Q,
        psi_pows=powers(psi, N),
        psi_inv_pows=powers(psi_inv, N),
        stage_twiddles=tuple(stages),
        stage_twiddles_inv=tuple(stages_inv),
        rev=_bit_reverse(N),
        n_inv=pow(N, Q - 2, Q),
    )
    for arr in (tables.psi_pows, tables.psi_inv_pows, tables.rev, *stages, *stages_inv):
        arr.setflags(write=False)
    return tables


def _cyclic_ntt(a: np.ndarray, twiddles: tuple, rev: np.ndarray, Q: int) -> np.ndarray:
    # iterative radix-2 DIT over the last axis; leading axes are batch
    a = a[..., rev]
    N = a.shape[-1]
    batch = a.shape[:-1]
    length = 2
    for w in twiddles:
        half = length // 2
        blocks = a.reshape(*batch, N // length, length)
        u = blocks[..., :half]
        v = blocks[..., half:] * w % Q
        a = np.concatenate(((u + v) % Q, (u - v) % Q), axis=-1).reshape(*batch, N)
        length *= 2
    return a


def ntt_forward(coeffs, Q: int) -> np.ndarray:
    """Negacyclic NTT over the last axis.

    Pointwise products of forward transforms correspond to products in
    Z_Q[x]/(x^N+1).
    """
    coeffs = np.asarray(coeffs)
    t = ntt_tables(coeffs.shape[-1], Q)
    return _cyclic_ntt(coeffs * t.psi_pows % Q, t.stage_twiddles, t.rev, Q)


def ntt_inverse(values, Q: int) -> np.ndarray:
    values = np.asarray(values)
    t = ntt_tables(values.shape[-1], Q)
    a = _cyclic_ntt(values, t.stage_twiddles_inv, t.rev, Q)
    return a * t.n_inv % Q * t.psi_inv_pows % Q


def ntt_friendly(N: int, Q: int) -> bool:
    try:
        ntt_tables(N, Q)
    except ParameterError:
        return False
    return True


# ---------------------------------------------------------------------------
# coefficient-array kernels (batch over leading axes)

def schoolbook_negacyclic(a, b, Q: int) -> np.ndarray:
    """O(N^2) negacyclic product of two coefficient vectors."""
    a = [int(x) for x in a]
    b = [int(x) for x in b]
    N = len(a)
    out = [0] * N
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            k = i + j
            if k < N:
                out[k] += ai * bj
            else:
                out[k - N] -= ai * bj
    return np.array([x % Q for x in out], dtype=coeff_dtype(Q))


def rotate(coeffs, k: int, Q: int) -> np.ndarray:
    """Multiply coefficient arrays (last axis = degree) by x^k."""
    coeffs = np.asarray(coeffs)
    N = coeffs.shape[-1]
    k %= 2 * N
    sign_flip = k >= N
    k %= N
    out = np.concatenate(((-coeffs[..., N - k:]) % Q, coeffs[..., : N - k]), axis=-1)
    if sign_flip:
        out = (-out) % Q
    return out


# ---------------------------------------------------------------------------
# RingElement

@dataclasses.dataclass(frozen=True, eq=False)
class RingElement:
    """Immutable element of Z_Q[x]/(x^N+1)."""

    coeffs: np.ndarray
    Q: int

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=coeff_dtype(self.Q)) % self.Q
        if c.ndim != 1 or not is_power_of_two(len(c)):
            raise ParameterError(f"degree bound must be a power of two, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def N(self) -> int:
        return len(self.coeffs)

    @classmethod
    def zero(cls, N: int, Q: int) -> RingElement:
        return cls(np.zeros(N, dtype=coeff_dtype(Q)), Q)

    @classmethod
    def monomial(cls, k: int, N: int, Q: int, scale: int = 1) -> RingElement:
        c = np.zeros(N, dtype=coeff_dtype(Q))
        c[0] = scale % Q
        return cls(rotate(c, k, Q), Q)

    def _check(self, other: RingElement) -> None:
        if self.N != other.N or self.Q != other.Q:
            raise ParameterError(
                f"ring mismatch: (N={self.N}, Q={self.Q}) vs (N={other.N}, Q={other.Q})"
            )

    def __add__(self, other: RingElement) -> RingElement:
        self._check(other)
        return RingElement(self.coeffs + other.coeffs, self.Q)

    def __sub__(self, other: RingElement) -> RingElement:
        self._check(other)
        return RingElement(self.coeffs - other.coeffs, self.Q)

    def __neg__(self) -> RingElement:
        return RingElement(-self.coeffs, self.Q)

    def __mul__(self, other):
        if isinstance(other, RingElement):
            return negacyclic_mul(self, other)
        return RingElement(self.coeffs * (int(other) % self.Q) % self.Q, self.Q)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.Q == other.Q and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self) -> int:
        return hash((self.Q, tuple(int(c) for c in self.coeffs)))

    def centered(self) -> np.ndarray:
        return centered(self.coeffs, self.Q)

    def __repr__(self) -> str:
        return f"RingElement(N={self.N}, Q={self.Q}, coeffs={list(map(int, self.coeffs))})"


def negacyclic_mul(a: RingElement, b: RingElement, *, use_ntt: bool | None = None) -> RingElement:
    """a*b mod (x^N+1, Q).  NTT when Q admits a 2N-th root of unity."""
    a._check(b)
    if use_ntt is None:
        use_ntt = ntt_friendly(a.N, a.Q)
    record_ring_mults()
    if use_ntt:
        prod = ntt_forward(a.coeffs, a.Q) * ntt_forward(b.coeffs, a.Q) % a.Q
        return RingElement(ntt_inverse(prod, a.Q), a.Q)
    return RingElement(schoolbook_negacyclic(a.coeffs, b.coeffs, a.Q), a.Q)


def mul_by_monomial(a: RingElement, k: int) -> RingElement:
    """x^k * a; a rotation, not a ring multiplication."""
    return RingElement(rotate(a.coeffs, k, a.Q), a.Q)
