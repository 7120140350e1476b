"""On-disk format: a fixed header followed by little-endian u64 words.

Header layout (little-endian): magic ``b"MMPB"``, u16 version, u16 kind,
then u64 fields n, N, q (ciphertext modulus), t, B (gadget base), and the
number of payload words.
"""

from __future__ import annotations

import enum
import struct

import numpy as np

from .bootstrap import BootstrappingKeySet
from .lattice import LweCiphertext, RgswCiphertext
from .params import gadget_length
from .switching import KeySwitchKey

MAGIC = b"MMPB"
VERSION = 1
HEADER = struct.Struct("<4sHH6Q")


class Kind(enum.IntEnum):
    LWE = 1
    BOOTSTRAPPING_KEYS = 2
    KEY_SWITCHING_KEY = 3


class FormatError(ValueError):
    pass


def _words(arr) -> bytes:
    return np.asarray(arr).astype(object).astype(np.uint64).astype("<u8").tobytes()


def _pack(kind: Kind, n: int, N: int, q: int, t: int, B: int, payload) -> bytes:
    data = _words(np.ravel(payload))
    return HEADER.pack(MAGIC, VERSION, kind, n, N, q, t, B, len(data) // 8) + data


def read_header(data: bytes) -> dict:
    if len(data) < HEADER.size:
        raise FormatError("truncated header")
    magic, version, kind, n, N, q, t, B, words = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    if len(data) != HEADER.size + 8 * words:
        raise FormatError(f"expected {words} payload words, got {(len(data) - HEADER.size) / 8}")
    return dict(kind=Kind(kind), n=n, N=N, q=q, t=t, B=B, words=words)


def _payload(data: bytes, q: int) -> np.ndarray:
    words = np.frombuffer(data, dtype="<u8", offset=HEADER.size)
    if q < 2**31:
        return words.astype(np.int64)
    return words.astype(object)


def dump_lwe(ct: LweCiphertext) -> bytes:
    return _pack(Kind.LWE, ct.n, 0, ct.q, ct.t, 0, list(map(int, ct.a)) + [ct.b])


def load_lwe(data: bytes) -> LweCiphertext:
    h = read_header(data)
    if h["kind"] != Kind.LWE:
        raise FormatError(f"expected LWE ciphertext, got {h['kind'].name}")
    w = _payload(data, h["q"])
    return LweCiphertext(w[:-1], int(w[-1]), h["q"], h["t"])


def dump_bootstrapping_keys(bk: BootstrappingKeySet) -> bytes:
    """2n RGSW ciphertexts (all plus keys, then all minus keys): 8 n l_B N words."""
    C0 = bk.plus[0]
    rows = np.stack([C.rows for C in bk.plus + bk.minus])
    return _pack(Kind.BOOTSTRAPPING_KEYS, bk.n, C0.N, C0.Q, 0, C0.B, rows)


def load_bootstrapping_keys(data: bytes) -> BootstrappingKeySet:
    h = read_header(data)
    if h["kind"] != Kind.BOOTSTRAPPING_KEYS:
        raise FormatError(f"expected bootstrapping keys, got {h['kind'].name}")
    n, N, Q, B = h["n"], h["N"], h["q"], h["B"]
    l_B = gadget_length(B, Q)
    rows = _payload(data, Q).reshape(2 * n, 2 * l_B, 2, N)
    cts = [RgswCiphertext(r, B, Q) for r in rows]
    return BootstrappingKeySet(tuple(cts[:n]), tuple(cts[n:]))


def dump_ksk(ksk: KeySwitchKey) -> bytes:
    """(n + 1) N B_ks l_ks words."""
    return _pack(Kind.KEY_SWITCHING_KEY, ksk.n, ksk.N, ksk.Q, 0, ksk.B_ks, ksk.keys)


def load_ksk(data: bytes) -> KeySwitchKey:
    h = read_header(data)
    if h["kind"] != Kind.KEY_SWITCHING_KEY:
        raise FormatError(f"expected key-switching key, got {h['kind'].name}")
    n, N, Q, B_ks = h["n"], h["N"], h["q"], h["B"]
    keys = _payload(data, Q).reshape(N, gadget_length(B_ks, Q), B_ks, n + 1)
    return KeySwitchKey(np.array(keys), B_ks, Q)
