"""Key-size accounting, correctness experiments and scheme comparison."""

from __future__ import annotations

import dataclasses
import math
import time
from pathlib import Path

import numpy as np

from .bootstrap import LookUpTable, boot_general, functional_bootstrap, keygen
from .lattice import DomainError, lwe_decrypt, lwe_encrypt, lwe_error
from .mmpm import is_transitive, normal_form, orbit_count, order, parse_mmpm
from .noise import var_bootstrap_output
from .params import ParameterSet
from .ring import ParameterError, count_ring_mults

WORD_BITS = 64


def format_binary(nbytes: int) -> str:
    """Three significant digits in binary units: 256 MiB, 2.35 GiB."""
    units = ["B", "KiB", "MiB", "GiB", "TiB"]
    value, k = float(nbytes), 0
    while value >= 1024 and k < len(units) - 1:
        value /= 1024
        k += 1
    digits = max(0, 2 - int(math.floor(math.log10(value)))) if value > 0 else 0
    text = f"{value:.{digits}f}"
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return f"{text} {units[k]}"


@dataclasses.dataclass(frozen=True)
class KeySizeReport:
    boot_bytes: int  # 64-bit words
    ksk_bytes: int
    boot_bytes_packed: int  # ceil(log2 Q) bits per coefficient
    ksk_bytes_packed: int

    def __iter__(self):
        # unpacks as (boot_bytes, ksk_bytes)
        return iter((self.boot_bytes, self.ksk_bytes))

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["boot"] = format_binary(self.boot_bytes)
        d["ksk"] = format_binary(self.ksk_bytes)
        return d


def boot_key_words(p: ParameterSet) -> int:
    return 8 * p.n * p.l_B * p.ring_dim


def ksk_words(p: ParameterSet) -> int:
    return (p.n + 1) * p.ring_dim * p.B_ks * p.l_ks


def key_size_report(p: ParameterSet) -> KeySizeReport:
    log_q = (p.Q - 1).bit_length()
    bw, kw = boot_key_words(p), ksk_words(p)
    return KeySizeReport(
        boot_bytes=bw * WORD_BITS // 8,
        ksk_bytes=kw * WORD_BITS // 8,
        boot_bytes_packed=-(-bw * log_q // 8),
        ksk_bytes_packed=-(-kw * log_q // 8),
    )


# ---------------------------------------------------------------------------
# function specs


def load_table_file(path, t_out: int) -> LookUpTable:
    """One 'input output' pair per line, decimal; inputs must cover 0..t-1."""
    pairs = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ParameterError(f"{path}:{lineno}: expected 'input output'")
        x, y = map(int, fields)
        if x in pairs:
            raise ParameterError(f"{path}:{lineno}: duplicate input {x}")
        pairs[x] = y
    t = len(pairs)
    if sorted(pairs) != list(range(t)):
        raise ParameterError(f"{path}: inputs must be exactly 0..{t - 1}")
    return LookUpTable(tuple(pairs[x] for x in range(t)), t_out)


def sign_table(t: int) -> LookUpTable:
    """Nega-cyclic sign on Z_t: -t/4 on [-t/4, t/4), t/4 elsewhere."""
    def f(x):
        y = x if x < t // 2 else x - t
        return -(t // 4) if -(t // 4) <= y < t // 4 else t // 4

    return LookUpTable.from_function(f, t, t)


def resolve_function(spec: str, p: ParameterSet) -> tuple[LookUpTable, bool]:
    """Table plus whether it goes through the two-round procedure."""
    if spec == "identity":
        return LookUpTable(tuple(range(p.t)), p.t_out), True
    if spec == "sign":
        if p.t % 4 or p.t_out != p.t:
            raise ParameterError("sign needs 4 | t and t_out == t")
        return sign_table(p.t), False
    if spec.startswith("table:"):
        table = load_table_file(spec[len("table:"):], p.t_out)
        if table.t != p.t:
            raise ParameterError(f"table has {table.t} inputs, preset has t={p.t}")
        return table, not table.nega_cyclic
    raise ParameterError(f"unknown function spec {spec!r}")


# ---------------------------------------------------------------------------
# experiments


@dataclasses.dataclass
class RunReport:
    preset: str
    scheme: str
    function: str
    trials: int
    seed: int
    failures: int = 0
    mean_abs_error: float = 0.0
    max_abs_error: int = 0
    predicted_proxy: float = 0.0
    wall_time_per_bootstrap: float = 0.0
    ring_mults_per_bootstrap: float = 0.0
    boot_key_bytes: int = 0
    ksk_bytes: int = 0
    outputs: list = dataclasses.field(default_factory=list, repr=False)

    def to_dict(self, include_timing: bool = True) -> dict:
        d = dataclasses.asdict(self)
        d.pop("outputs")
        if not include_timing:
            d.pop("wall_time_per_bootstrap")
        return d


def _messages(p: ParameterSet, trials: int, seed: int) -> list[int]:
    # drawn from their own stream so paired runs see the same inputs
    rng = np.random.default_rng([seed, 1])
    return [int(m) for m in rng.integers(0, p.t, size=trials)]


def run_experiment(
    p: ParameterSet, function_spec: str = "identity", trials: int = 100, seed: int = 0
) -> RunReport:
    p.validate()
    table, general = resolve_function(function_spec, p)
    sizes = key_size_report(p)
    report = RunReport(
        p.name, p.scheme, function_spec, trials, seed,
        boot_key_bytes=sizes.boot_bytes, ksk_bytes=sizes.ksk_bytes,
    )
    if trials == 0:
        return report

    rng = np.random.default_rng([seed, 0])
    sk, ek = keygen(p, rng)
    report.predicted_proxy = float(var_bootstrap_output(p, sk.s.norm2))
    enc_t = 2 * p.t if general else p.t
    errors = []
    elapsed = 0.0
    with count_ring_mults() as counter:
        for m in _messages(p, trials, seed):
            ct = lwe_encrypt(m, sk.s, p.q, enc_t, p.sigma_enc, rng)
            start = time.perf_counter()
            out = boot_general(ct, table, ek) if general else functional_bootstrap(ct, table, ek)
            elapsed += time.perf_counter() - start
            got = lwe_decrypt(out, sk.s)
            expected = table(m)
            report.outputs.append(got)
            report.failures += got != expected
            errors.append(abs(lwe_error(out, sk.s, expected)))
    report.mean_abs_error = float(np.mean(errors))
    report.max_abs_error = int(max(errors))
    report.wall_time_per_bootstrap = elapsed / trials
    report.ring_mults_per_bootstrap = counter.count / trials
    return report


@dataclasses.dataclass
class Comparison:
    mmpm: RunReport
    tfhe: RunReport

    @property
    def identical_outputs(self) -> bool:
        return self.mmpm.outputs == self.tfhe.outputs

    @property
    def key_size_ratio(self) -> float:
        return self.tfhe.boot_key_bytes / self.mmpm.boot_key_bytes

    @property
    def time_ratio(self) -> float:
        if self.mmpm.wall_time_per_bootstrap == 0:
            return math.nan
        return self.tfhe.wall_time_per_bootstrap / self.mmpm.wall_time_per_bootstrap

    def to_dict(self, include_timing: bool = True) -> dict:
        d = {
            "mmpm": self.mmpm.to_dict(include_timing),
            "tfhe": self.tfhe.to_dict(include_timing),
            "identical_outputs": self.identical_outputs,
            "key_size_ratio": self.key_size_ratio,
        }
        if include_timing:
            d["time_ratio"] = self.time_ratio
        return d


def compare_schemes(
    p_mmpm: ParameterSet,
    p_tfhe: ParameterSet,
    trials: int = 50,
    seed: int = 0,
    function_spec: str = "identity",
) -> Comparison:
    if p_mmpm.scheme != "mmpm" or p_tfhe.scheme != "tfhe":
        raise ParameterError("expected an mmpm preset and a tfhe preset")
    same = ("n", "q", "t", "t_out")
    if any(getattr(p_mmpm, f) != getattr(p_tfhe, f) for f in same):
        raise ParameterError(f"presets must share {same}")
    if p_tfhe.ring_dim != p_mmpm.N * p_mmpm.r:
        raise ParameterError(
            f"tfhe ring dimension {p_tfhe.ring_dim} != N*r = {p_mmpm.N * p_mmpm.r}"
        )
    return Comparison(
        run_experiment(p_mmpm, function_spec, trials, seed),
        run_experiment(p_tfhe, function_spec, trials, seed),
    )


def mmpm_explore(spec: str) -> dict:
    try:
        A = parse_mmpm(spec)
    except (ValueError, IndexError, ParameterError) as exc:
        raise DomainError(f"malformed matrix spec: {exc}") from None
    nf = normal_form(A)
    return {
        "r": A.r,
        "N": A.N,
        "normal_form": [{"size": size, "exps": list(us)} for size, us in nf.blocks],
        "psi": list(nf.psi),
        "order": order(A),
        "orbits": orbit_count(A),
        "transitive": is_transitive(A),
    }


__all__ = [
    "DomainError",
    "KeySizeReport",
    "RunReport",
    "Comparison",
    "compare_schemes",
    "format_binary",
    "key_size_report",
    "mmpm_explore",
    "run_experiment",
]
