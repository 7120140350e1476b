"""Modulus switching, LWE key switching and constant-term extraction."""

from __future__ import annotations

import dataclasses

import numpy as np

from .lattice import (
    LweCiphertext,
    LweSecret,
    RingSecret,
    RlweCiphertext,
    gadget_decompose,
    round_div,
    sample_gaussian,
    sample_uniform,
)
from .params import gadget_length
from .ring import ParameterError, coeff_dtype


def modulus_switch(ct: LweCiphertext, q_new: int) -> LweCiphertext:
    """(a, b) -> (round(a q_new / q), round(b q_new / q)), ties upward."""
    a = round_div(ct.a, q_new, ct.q)
    b = int(round_div(np.array([ct.b], dtype=object), q_new, ct.q)[0])
    return LweCiphertext(np.asarray(a) % q_new, b, q_new, ct.t)


def sample_extract(ct: RlweCiphertext) -> LweCiphertext:
    """LWE encryption of the constant coefficient under (z_0, ..., z_{N-1}).

    a'' = (a_0, -a_{N-1}, ..., -a_1), b'' = b_0.
    """
    a = ct.a.coeffs
    a2 = np.concatenate((a[:1], (-a[:0:-1]) % ct.Q))
    return LweCiphertext(a2, int(ct.b.coeffs[0]), ct.Q, ct.t)


@dataclasses.dataclass(frozen=True, eq=False)
class KeySwitchKey:
    """keys[i, j, k] = (a, b) encrypting z_i * B_ks^j * k mod Q under s.

    Shape (N, l_ks, B_ks, n + 1); the last column holds b.
    """

    keys: np.ndarray
    B_ks: int
    Q: int

    def __post_init__(self):
        self.keys.setflags(write=False)

    @property
    def N(self) -> int:
        return self.keys.shape[0]

    @property
    def l_ks(self) -> int:
        return self.keys.shape[1]

    @property
    def n(self) -> int:
        return self.keys.shape[3] - 1

    @property
    def num_entries(self) -> int:
        return self.N * self.l_ks * self.B_ks

    def entry(self, i: int, j: int, k: int, t: int) -> LweCiphertext:
        row = self.keys[i, j, k]
        return LweCiphertext(row[:-1], int(row[-1]), self.Q, t)


def gen_ksk(
    z: RingSecret,
    s: LweSecret,
    B_ks: int,
    sigma: float,
    rng: np.random.Generator,
) -> KeySwitchKey:
    Q, N, n = z.Q, z.N, s.n
    l_ks = gadget_length(B_ks, Q)
    z_vec = np.array([int(c) for c in z.z.centered()], dtype=object)
    powers = np.array([B_ks**j for j in range(l_ks)], dtype=object)
    digits = np.arange(B_ks, dtype=object)
    values = (z_vec[:, None, None] * powers[None, :, None] * digits[None, None, :]) % Q

    dtype = coeff_dtype(Q)
    shape = (N, l_ks, B_ks)
    a = sample_uniform(rng, Q, shape + (n,))
    e = sample_gaussian(rng, sigma, shape)
    a_dot_s = (a.astype(object) @ s.s.astype(object)) if dtype is object else a @ s.s
    b = (a_dot_s + values.astype(dtype) + e) % Q
    keys = np.concatenate((a, np.asarray(b, dtype=dtype)[..., None]), axis=-1)
    return KeySwitchKey(keys, B_ks, Q)


def key_switch(ct: LweCiphertext, ksk: KeySwitchKey) -> LweCiphertext:
    """(0^n, b) - sum_{i,j} ksk[i, j, digit_j(a_i)]."""
    if ct.n != ksk.N or ct.q != ksk.Q:
        raise ParameterError(
            f"key-switching key is for (N={ksk.N}, Q={ksk.Q}), ciphertext has "
            f"(n={ct.n}, q={ct.q})"
        )
    digits = gadget_decompose(ct.a, ksk.B_ks, ksk.l_ks)  # (l_ks, N)
    i_idx = np.arange(ksk.N)[None, :]
    j_idx = np.arange(ksk.l_ks)[:, None]
    picked = ksk.keys[i_idx, j_idx, digits.astype(np.int64)]  # (l_ks, N, n+1)
    total = picked.reshape(-1, ksk.n + 1).sum(axis=0) % ksk.Q
    a = (-total[:-1]) % ksk.Q
    b = (ct.b - int(total[-1])) % ksk.Q
    return LweCiphertext(a, b, ksk.Q, ct.t)
