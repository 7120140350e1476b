"""Parameter sets and shipped presets."""

from __future__ import annotations

import dataclasses
import math
import warnings

from .ring import ParameterError, is_power_of_two, ntt_friendly

# prime, = 1 mod 2^13: NTT-friendly for every ring dimension up to 4096
DESK_Q = 134176769
# prime below 2^54, = 1 mod 2^19: NTT-friendly up to ring dimension 2^18
PAPER_Q = 18014398492704769

SCHEMES = ("mmpm", "tfhe")


def gadget_length(base: int, modulus: int) -> int:
    """Smallest l with base**l >= modulus, i.e. ceil(log_base(modulus))."""
    if base < 2:
        raise ParameterError(f"gadget base must be >= 2, got {base}")
    length, power = 0, 1
    while power < modulus:
        power *= base
        length += 1
    return max(length, 1)


@dataclasses.dataclass(frozen=True)
class ParameterSet:
    name: str
    n: int
    q: int
    t: int
    t_out: int
    N: int
    r: int
    Q: int
    B: int
    B_ks: int
    sigma_enc: float = 1.0
    sigma_boot: float = 3.2
    sigma_ks: float = 3.2
    H: float = 6.0
    scheme: str = "mmpm"

    @property
    def l_B(self) -> int:
        return gadget_length(self.B, self.Q)

    @property
    def l_ks(self) -> int:
        return gadget_length(self.B_ks, self.Q)

    @property
    def q_prime(self) -> int:
        """Modulus after the first modulus switch, 2*N*r."""
        return 2 * self.N * self.r

    @property
    def ring_dim(self) -> int:
        """Ring dimension of the RLWE/RGSW ciphertexts (N*r for the TFHE baseline)."""
        return self.N if self.scheme == "mmpm" else self.N * self.r

    @property
    def vector_dim(self) -> int:
        """Length of the accumulator vector."""
        return self.r if self.scheme == "mmpm" else 1

    def replace(self, **changes) -> ParameterSet:
        return dataclasses.replace(self, **changes)

    def as_tfhe(self) -> ParameterSet:
        """Baseline counterpart: one ring of dimension N*r, same (n, q, t)."""
        return self.replace(name=f"{self.name}-tfhe", scheme="tfhe")

    def validate(self, *, check_ntt: bool = True) -> None:
        if self.scheme not in SCHEMES:
            raise ParameterError(f"unknown scheme {self.scheme!r}")
        if min(self.n, self.q, self.t, self.t_out, self.N, self.r, self.Q) < 1:
            raise ParameterError("all sizes must be positive")
        if not is_power_of_two(self.N):
            raise ParameterError(f"N={self.N} must be a power of two")
        if self.t % 2:
            raise ParameterError(f"plaintext modulus t={self.t} must be even")
        if self.scheme == "tfhe" and not is_power_of_two(self.ring_dim):
            raise ParameterError(f"TFHE baseline needs N*r={self.ring_dim} a power of two")
        if self.q_prime < 2 * self.t:
            raise ParameterError(f"2Nr={self.q_prime} must be at least 2t={2 * self.t}")
        if self.Q <= self.q:
            raise ParameterError("Q must exceed q")
        if self.B < 2 or self.B_ks < 2:
            raise ParameterError("gadget bases must be >= 2")
        if check_ntt and not ntt_friendly(self.ring_dim, self.Q):
            raise ParameterError(f"Q={self.Q} has no 2N-th root of unity for N={self.ring_dim}")
        if self.r != math.ceil(self.q / (2 * self.N)):
            warnings.warn(
                f"{self.name}: r={self.r} differs from ceil(q/2N)={math.ceil(self.q / (2 * self.N))}",
                stacklevel=2,
            )


def _desk(name: str, N: int, r: int, **kw) -> ParameterSet:
    return ParameterSet(
        name=name, n=16, q=512, t=8, t_out=8, N=N, r=r, Q=DESK_Q, B=2**9, B_ks=25, **kw
    )


def _paper(name: str, n: int, log_t: int) -> ParameterSet:
    # Tables 1-2: log q = log t + 7, log N = 11, log r = log t - 5
    return ParameterSet(
        name=name,
        n=n,
        q=2 ** (log_t + 7),
        t=2**log_t,
        t_out=2**log_t,
        N=2**11,
        r=2 ** (log_t - 5),
        Q=PAPER_Q,
        B=2**15,
        B_ks=25,
        sigma_enc=3.2,
    )


def _build_presets() -> dict[str, ParameterSet]:
    presets = [
        _desk("desk-small", N=64, r=4),
        _desk("desk-r2", N=128, r=2),
        _desk("desk-r1", N=256, r=1),
        ParameterSet(
            name="desk-tiny", n=8, q=64, t=4, t_out=4, N=16, r=2, Q=DESK_Q, B=2**9, B_ks=25,
            sigma_enc=0.5, sigma_boot=1.0, sigma_ks=1.0,
        ),
    ]
    presets += [_paper(f"paper-t{k}", 2**9, k) for k in range(5, 12)]
    presets += [_paper(f"paper2-t{k}", 2**10, k) for k in range(5, 16)]
    out = {}
    for p in presets:
        out[p.name] = p
        if is_power_of_two(p.r):
            tf = p.as_tfhe()
            out[tf.name] = tf
    return out


PRESETS: dict[str, ParameterSet] = _build_presets()


def get_preset(name: str) -> ParameterSet:
    try:
        return PRESETS[name]
    except KeyError:
        raise ParameterError(
            f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}"
        ) from None


_INT_FIELDS = {"n", "q", "t", "t_out", "N", "r", "Q", "B", "B_ks"}
_FLOAT_FIELDS = {"sigma_enc", "sigma_boot", "sigma_ks", "H"}


def parse_overrides(text: str) -> dict:
    """Parse 'k=v,k=v' into typed ParameterSet fields.  Integers accept 2**k."""
    out: dict = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, sep, value = item.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise ParameterError(f"malformed parameter {item!r}, expected k=v")
        if key in _INT_FIELDS:
            if "**" in value:
                base, exp = value.split("**")
                out[key] = int(base) ** int(exp)
            else:
                out[key] = int(value)
        elif key in _FLOAT_FIELDS:
            out[key] = float(value)
        elif key in ("name", "scheme"):
            out[key] = value
        else:
            raise ParameterError(f"unknown parameter {key!r}")
    return out
