"""Subgaussian variance-proxy bookkeeping for the bootstrapping pipeline.

Every formula works on exact rationals (floats are converted with
Fraction, so their binary value is kept exactly).
"""

from __future__ import annotations

import dataclasses
import math
from fractions import Fraction
from typing import NamedTuple

from .params import ParameterSet

VarianceProxy = Fraction


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def var_external_product(beta2, sigma2, N: int, l_B: int, B: int) -> Fraction:
    """RLWE x RGSW: 2 N l_B B^2 sigma^2 + beta^2."""
    return 2 * N * l_B * B * B * _frac(sigma2) + _frac(beta2)


def var_cmux(beta2, sigma2, N: int, l_B: int, B: int) -> Fraction:
    """Ternary CMux with two external products: beta^2 + 4 N l_B B^2 sigma^2."""
    return _frac(beta2) + 4 * N * l_B * B * B * _frac(sigma2)


def var_modswitch(beta2, q_old: int, q_new: int, s_norm2) -> Fraction:
    """(q_new/q_old)^2 beta^2 + (||s||^2 + 1)/12 for deterministic rounding."""
    ratio = Fraction(q_new, q_old)
    return ratio * ratio * _frac(beta2) + Fraction(_frac(s_norm2) + 1, 12)


def var_keyswitch(beta2, N: int, l_ks: int, sigma_ks2) -> Fraction:
    """beta^2 + N l_ks sigma_ks^2 (one key error per (i, j))."""
    return _frac(beta2) + N * l_ks * _frac(sigma_ks2)


class TraceStep(NamedTuple):
    step: str
    proxy: Fraction


def bootstrap_noise_trace(params: ParameterSet, s_norm2=None) -> list[TraceStep]:
    """Proxy after each step of the bootstrap, starting from the error-free accumulator."""
    p = params
    s_norm2 = p.n if s_norm2 is None else s_norm2
    sigma2 = _frac(p.sigma_boot) ** 2
    N = p.ring_dim
    proxy = Fraction(0)
    trace = [TraceStep("init", proxy)]
    for _ in range(p.n):
        proxy = var_cmux(proxy, sigma2, N, p.l_B, p.B)
    trace.append(TraceStep("blind_rotate", proxy))
    trace.append(TraceStep("sample_extract", proxy))
    proxy = var_keyswitch(proxy, N, p.l_ks, _frac(p.sigma_ks) ** 2)
    trace.append(TraceStep("key_switch", proxy))
    proxy = var_modswitch(proxy, p.Q, p.q, s_norm2)
    trace.append(TraceStep("modulus_switch", proxy))
    return trace


def var_bootstrap_output(params: ParameterSet, s_norm2=None) -> Fraction:
    """Output proxy in closed form.

    4 n N l_B B^2 (q/Q)^2 sigma^2 + N l_ks (q/Q)^2 sigma_ks^2 + (||s||^2 + 1)/12.
    The initial q -> 2Nr rounding is input noise and does not appear here;
    see var_input_modswitch.  ``s_norm2`` defaults to the worst case n.
    """
    p = params
    s_norm2 = p.n if s_norm2 is None else s_norm2
    N = p.ring_dim
    ratio2 = Fraction(p.q, p.Q) ** 2
    return (
        4 * p.n * N * p.l_B * p.B**2 * ratio2 * _frac(p.sigma_boot) ** 2
        + N * p.l_ks * ratio2 * _frac(p.sigma_ks) ** 2
        + Fraction(_frac(s_norm2) + 1, 12)
    )


def var_input_modswitch(params: ParameterSet, beta2, s_norm2=None) -> Fraction:
    """Proxy of the ciphertext entering blind rotation (after q -> 2Nr)."""
    s_norm2 = params.n if s_norm2 is None else s_norm2
    return var_modswitch(beta2, params.q, params.q_prime, s_norm2)


@dataclasses.dataclass(frozen=True)
class NoiseBudget:
    proxy: Fraction
    modulus: int
    t: int
    H: float = 6.0

    @property
    def bound(self) -> float:
        return self.H * math.sqrt(self.proxy)

    @property
    def limit(self) -> Fraction:
        return Fraction(self.modulus // self.t, 2)

    @property
    def decryptable(self) -> bool:
        return self.bound < self.limit

    @property
    def margin_bits(self) -> float:
        """log2(limit / bound); positive when decryptable."""
        if self.proxy == 0:
            return math.inf
        return math.log2(float(self.limit) / self.bound)


def choose_r(q: int, N: int) -> tuple[int, int]:
    """r = ceil(q / 2N) and q' = 2 N r."""
    r = -(-q // (2 * N))
    return r, 2 * N * r


class BoundCheck(NamedTuple):
    ok: bool
    lhs: Fraction  # N^2 r^2
    rhs: Fraction | None  # None when no r can satisfy the bound
    min_r: int | None

    def __bool__(self) -> bool:
        return self.ok


def check_decryptable_bound(
    params: ParameterSet, beta2, s_norm2=None, t: int | None = None
) -> BoundCheck:
    """N^2 r^2 > ((||s||^2 + 1)/12) / (1/(H^2 t^2) - 4 beta^2 / q^2).

    ``t`` defaults to params.t; pass 2t for inputs of the two-round procedure.
    """
    p = params
    s_norm2 = p.n if s_norm2 is None else s_norm2
    t = p.t if t is None else t
    H = _frac(p.H)
    lhs = Fraction(p.N * p.r) ** 2
    denom = 1 / (H * H * t * t) - 4 * _frac(beta2) / Fraction(p.q) ** 2
    if denom <= 0:
        return BoundCheck(False, lhs, None, None)
    rhs = Fraction(_frac(s_norm2) + 1, 12) / denom
    # smallest integer r with (N r)^2 > rhs
    r_min = math.isqrt(int(rhs) // (p.N * p.N)) if rhs > 0 else 0
    while Fraction(p.N * r_min) ** 2 <= rhs:
        r_min += 1
    r_min = max(r_min, 1)
    return BoundCheck(lhs > rhs, lhs, rhs, r_min)
