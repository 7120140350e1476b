"""Monic monomial permutation matrices over Q(x)/(x^N + 1).

A matrix is stored sparsely as a permutation ``perm`` of [r] and an exponent
vector ``exps`` indexed by row: column j holds x^{exps[perm[j]]} in row
perm[j], i.e. A e_j = x^{u_{perm(j)}} e_{perm(j)}.  Exponents live in Z_2N
because x^N = -1.
"""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Sequence
from typing import NamedTuple

import numpy as np

from .ring import ParameterError, RingElement, rotate
from .lattice import DomainError


@dataclasses.dataclass(frozen=True)
class Mmpm:
    perm: tuple[int, ...]
    exps: tuple[int, ...]
    N: int

    def __post_init__(self):
        perm = tuple(int(p) for p in self.perm)
        exps = tuple(int(u) % (2 * self.N) for u in self.exps)
        if sorted(perm) != list(range(len(perm))):
            raise DomainError(f"{perm} is not a permutation of [{len(perm)}]")
        if len(exps) != len(perm):
            raise DomainError("perm and exps must have the same length")
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "exps", exps)

    @property
    def r(self) -> int:
        return len(self.perm)

    @classmethod
    def identity(cls, r: int, N: int) -> Mmpm:
        return cls(tuple(range(r)), (0,) * r, N)

    def _check(self, other: Mmpm) -> None:
        if (self.r, self.N) != (other.r, other.N):
            raise ParameterError(f"MMPM size mismatch: {(self.r, self.N)} vs {(other.r, other.N)}")

    def __matmul__(self, other: Mmpm) -> Mmpm:
        return mmpm_mul(self, other)

    def inverse_perm(self) -> tuple[int, ...]:
        inv = [0] * self.r
        for j, p in enumerate(self.perm):
            inv[p] = j
        return tuple(inv)

    def act_on_indicator(self, i: int, j: int) -> tuple[int, int]:
        """A (x^i e_j) = x^{i + u_perm(j)} e_perm(j)."""
        row = self.perm[j]
        return (i + self.exps[row]) % (2 * self.N), row

    def is_cyclic_shift(self) -> bool:
        """True for the single-block shape with perm(j) = j + 1 mod r."""
        return all(p == (j + 1) % self.r for j, p in enumerate(self.perm))

    def to_spec(self) -> str:
        return f"{self.r} {self.N}; {' '.join(map(str, self.perm))}; {' '.join(map(str, self.exps))}"


def parse_mmpm(text: str) -> Mmpm:
    """Parse 'r N; p0 ... p(r-1); u0 ... u(r-1)'."""
    parts = [p.strip() for p in text.strip().split(";")]
    if len(parts) != 3:
        raise DomainError(f"expected 'r N; perm; exps', got {text!r}")
    try:
        r, N = (int(x) for x in parts[0].split())
        perm = tuple(int(x) for x in parts[1].split())
        exps = tuple(int(x) for x in parts[2].split())
    except ValueError as exc:
        raise DomainError(f"malformed matrix spec {text!r}: {exc}") from None
    if len(perm) != r or len(exps) != r:
        raise DomainError(f"expected {r} entries in perm and exps")
    if N < 1 or N & (N - 1):
        raise DomainError(f"N={N} must be a power of two")
    return Mmpm(perm, exps, N)


def mmpm_mul(A: Mmpm, B: Mmpm) -> Mmpm:
    A._check(B)
    perm = tuple(A.perm[B.perm[j]] for j in range(A.r))
    a_inv = A.inverse_perm()
    exps = tuple(A.exps[i] + B.exps[a_inv[i]] for i in range(A.r))
    return Mmpm(perm, exps, A.N)


def mmpm_pow(A: Mmpm, l: int) -> Mmpm:
    """A^l by repeated squaring; negative l uses the group order."""
    if l < 0:
        l %= order(A)
    result, base = Mmpm.identity(A.r, A.N), A
    while l:
        if l & 1:
            result = mmpm_mul(result, base)
        base = mmpm_mul(base, base)
        l >>= 1
    return result


def cyclic_power(A: Mmpm, l: int) -> Mmpm:
    """Closed form of A^l for a cyclic-shift matrix A (l >= 0).

    Row i of A^l sits in column i - l and carries x^{u_i + u_{i-1} + ... + u_{i-l+1}}.
    """
    if not A.is_cyclic_shift():
        raise DomainError("closed-form power needs a cyclic-shift matrix")
    r = A.r
    perm = tuple((j + l) % r for j in range(r))
    exps = tuple(sum(A.exps[(i - t) % r] for t in range(l)) for i in range(r))
    return Mmpm(perm, exps, A.N)


def phi(c: int, r: int, N: int) -> Mmpm:
    """Phi(c) for the generator Phi(1) = [[0, x], [I_{r-1}, 0]].

    With c = a r + b (0 <= b < r): the top b rows hold x^{a+1} I_b in the last
    b columns, the bottom r - b rows hold x^a I_{r-b} in the first columns.
    """
    c %= 2 * N * r
    a, b = divmod(c, r)
    perm = tuple((j + b) % r for j in range(r))
    exps = tuple(a + 1 if i < b else a for i in range(r))
    return Mmpm(perm, exps, N)


def canonical_generator(r: int, N: int) -> Mmpm:
    return phi(1, r, N)


# ---------------------------------------------------------------------------
# structure


class NormalForm(NamedTuple):
    """Block-diagonal similar form.

    ``blocks[k] = (r_k, (u_{k,0}, ..., u_{k,r_k-1}))``; each block is the
    cyclic-shift matrix with x^{u_{k,0}} in its top-right corner.  ``psi`` is
    the basis permutation: new index t corresponds to old index psi[t], so
    T = (delta_{i, psi(j)}) satisfies T^{-1} A T = diag(blocks).
    """

    blocks: tuple[tuple[int, tuple[int, ...]], ...]
    psi: tuple[int, ...]

    @property
    def h(self) -> int:
        return len(self.blocks)


def normal_form(A: Mmpm) -> NormalForm:
    # cycles taken from the smallest unused index; order-preserving otherwise
    seen = [False] * A.r
    blocks, psi = [], []
    for start in range(A.r):
        if seen[start]:
            continue
        cycle = [start]
        seen[start] = True
        nxt = A.perm[start]
        while nxt != start:
            cycle.append(nxt)
            seen[nxt] = True
            nxt = A.perm[nxt]
        blocks.append((len(cycle), tuple(A.exps[i] for i in cycle)))
        psi.extend(cycle)
    return NormalForm(tuple(blocks), tuple(psi))


def block_matrix(blocks, N: int) -> Mmpm:
    """diag(A_1, ..., A_h) from normal-form blocks."""
    perm, exps, offset = [], [], 0
    for size, us in blocks:
        perm.extend(offset + (j + 1) % size for j in range(size))
        exps.extend(us)
        offset += size
    return Mmpm(tuple(perm), tuple(exps), N)


def monomial_order(v: int, N: int) -> int:
    """Order of x^v in the cyclic group generated by x (of order 2N)."""
    return 2 * N // math.gcd(2 * N, v % (2 * N))


def block_order(size: int, exps: Sequence[int], N: int) -> int:
    return size * monomial_order(sum(exps), N)


def order(A: Mmpm) -> int:
    """LCM over normal-form blocks of r_k * order(x^{sum u_k})."""
    result = 1
    for size, us in normal_form(A).blocks:
        result = math.lcm(result, block_order(size, us, A.N))
    return result


def orbit_count(A: Mmpm) -> int:
    """Number of orbits of <A> on {x^i e_j : i in [2N], j in [r]}."""
    return sum(
        2 * A.N * size // block_order(size, us, A.N) for size, us in normal_form(A).blocks
    )


def is_transitive(A: Mmpm) -> bool:
    nf = normal_form(A)
    if nf.h != 1:
        return False
    size, us = nf.blocks[0]
    return monomial_order(sum(us), A.N) == 2 * A.N


# ---------------------------------------------------------------------------
# action on vectors


def apply_to_arrays(A: Mmpm, coeffs: np.ndarray, modulus: int) -> np.ndarray:
    """(A v)_i = x^{u_i} v_{perm^{-1}(i)} for coefficient arrays of shape (r, ..., N)."""
    coeffs = np.asarray(coeffs)
    if coeffs.shape[0] != A.r:
        raise ParameterError(f"vector length {coeffs.shape[0]} != r={A.r}")
    if coeffs.shape[-1] != A.N:
        raise ParameterError(f"ring dimension {coeffs.shape[-1]} != N={A.N}")
    inv = A.inverse_perm()
    return np.stack([rotate(coeffs[inv[i]], A.exps[i], modulus) for i in range(A.r)])


def apply_mmpm_to_ring_vector(A: Mmpm, v: Sequence[RingElement]) -> list[RingElement]:
    """Permute entries and multiply each by its monomial; rotations only."""
    if len(v) != A.r:
        raise ParameterError(f"vector length {len(v)} != r={A.r}")
    modulus = v[0].Q
    out = apply_to_arrays(A, np.stack([e.coeffs for e in v]), modulus)
    return [RingElement(row, modulus) for row in out]


def linear_independence_check(A: Mmpm, k: int) -> bool:
    """Rank over Q of {A^{k+i} e_0 : i in [N r]} in the N r coordinates x^j e_b."""
    if not is_transitive(A):
        raise DomainError("linear independence is only asserted for transitive generators")
    import sympy

    size = A.N * A.r
    rows = []
    for i in range(size):
        expo, idx = mmpm_pow(A, k + i).act_on_indicator(0, 0)
        vec = [0] * size
        sign = 1 if expo < A.N else -1
        vec[idx * A.N + expo % A.N] = sign
        rows.append(vec)
    return sympy.Matrix(rows).rank() == size


# ---------------------------------------------------------------------------
# test polynomial vectors


def check_negacyclic(table: Sequence[int], modulus: int) -> int | None:
    """First index i in the lower half with table[i + L/2] != -table[i] (mod modulus)."""
    half = len(table) // 2
    for i in range(half):
        if (int(table[i + half]) + int(table[i])) % modulus:
            return i
    return None


@dataclasses.dataclass(frozen=True)
class TestVector:
    """r polynomials with coefficients in Z_{t_out}; entry b, coefficient a = f'(-(a r + b))."""

    __test__ = False  # keep pytest from collecting this class

    entries: tuple[RingElement, ...]
    N: int
    r: int
    t_out: int

    def coeff_array(self) -> np.ndarray:
        return np.stack([e.coeffs for e in self.entries])


def build_test_vector(table: Sequence[int], r: int, N: int, t_out: int) -> TestVector:
    size = 2 * N * r
    if len(table) != size:
        raise DomainError(f"table must have 2Nr={size} entries, got {len(table)}")
    bad = check_negacyclic(table, t_out)
    if bad is not None:
        raise DomainError(f"table is not nega-cyclic at index {bad}")
    entries = []
    for b in range(r):
        coeffs = [int(table[-(a * r + b) % size]) % t_out for a in range(N)]
        entries.append(RingElement(coeffs, t_out))
    return TestVector(tuple(entries), N, r, t_out)


def test_vector_at(table: Sequence[int], k: int, A: Mmpm, t_out: int) -> list[RingElement]:
    """v_k = sum_{i in [N r]} table[i] * A^{k - i} e_0, built from the group action."""
    N, r = A.N, A.r
    coeffs = np.zeros((r, N), dtype=object)
    for i in range(N * r):
        expo, idx = mmpm_pow(A, k - i).act_on_indicator(0, 0)
        sign = 1 if expo < N else -1
        coeffs[idx, expo % N] += sign * int(table[i])
    return [RingElement(list(row % t_out), t_out) for row in coeffs]


test_vector_at.__test__ = False


class LookupCheck(NamedTuple):
    ok: bool
    failing_m: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def lookup_property_check(table: Sequence[int], r: int, N: int, t_out: int) -> LookupCheck:
    """Every rotation Phi(m) brings f'(m) to the constant term of the first entry."""
    v = build_test_vector(table, r, N, t_out)
    arr = v.coeff_array()
    for m in range(2 * N * r):
        rotated = apply_to_arrays(phi(m, r, N), arr, t_out)
        if int(rotated[0, 0]) != int(table[m]) % t_out:
            return LookupCheck(False, m)
    return LookupCheck(True)
