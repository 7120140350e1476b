"""mmpmboot command line: plan | keys | run | compare | explore."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import serialize
from .bench import compare_schemes, format_binary, key_size_report, mmpm_explore, run_experiment
from .bootstrap import keygen
from .lattice import DomainError
from .noise import (
    NoiseBudget,
    check_decryptable_bound,
    choose_r,
    var_bootstrap_output,
    var_input_modswitch,
)
from .params import PRESETS, ParameterSet, get_preset, parse_overrides
from .ring import ParameterError


def _params(args) -> ParameterSet:
    p = get_preset(args.preset)
    if args.params:
        p = p.replace(**parse_overrides(args.params))
    return p


def _table(rows: list[tuple[str, object]]) -> str:
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def _emit(args, record: dict, rows: list[tuple[str, object]]) -> None:
    if args.json:
        print(json.dumps(record, indent=2, sort_keys=True))
    else:
        print(_table(rows))
    if args.csv:
        flat = _flatten(record)
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(flat))
            w.writeheader()
            w.writerow(flat)


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = json.dumps(v)
        else:
            out[key] = v
    return out


def cmd_plan(args) -> int:
    p = _params(args)
    p.validate(check_ntt=False)
    r, q_prime = choose_r(p.q, p.N)
    beta2 = p.sigma_enc**2
    out_proxy = var_bootstrap_output(p)
    in_proxy = var_input_modswitch(p, beta2)
    budget = NoiseBudget(out_proxy, p.q, p.t, p.H)
    bound = check_decryptable_bound(p, beta2)
    bound2 = check_decryptable_bound(p, beta2, t=2 * p.t)
    record = {
        "preset": p.name,
        "scheme": p.scheme,
        "params": {k: getattr(p, k) for k in ("n", "q", "t", "t_out", "N", "r", "Q", "B", "B_ks")},
        "l_B": p.l_B,
        "l_ks": p.l_ks,
        "r_selected": r,
        "q_prime": q_prime,
        "predicted_output_proxy": float(out_proxy),
        "input_modswitch_proxy": float(in_proxy),
        "output_margin_bits": budget.margin_bits,
        "output_decryptable": budget.decryptable,
        "bound_ok": bound.ok,
        "bound_ok_2t": bound2.ok,
        "min_r": bound.min_r,
    }
    rows = [
        ("preset", f"{p.name} ({p.scheme})"),
        ("n, q, t", f"{p.n}, {p.q}, {p.t}"),
        ("N, r, Q", f"{p.N}, {p.r}, {p.Q}"),
        ("l_B, l_ks", f"{p.l_B}, {p.l_ks}"),
        ("r = ceil(q/2N)", f"{r} (q' = {q_prime})"),
        ("output proxy", f"{float(out_proxy):.6g}"),
        ("input modswitch proxy", f"{float(in_proxy):.6g}"),
        ("output margin (bits)", f"{budget.margin_bits:.2f}"),
        ("bound on r (t / 2t)", f"{bound.ok} / {bound2.ok} (min r {bound.min_r})"),
    ]
    _emit(args, record, rows)
    return 0 if bound.ok and budget.decryptable else 1


def cmd_keys(args) -> int:
    p = _params(args)
    sizes = key_size_report(p)
    record = {"preset": p.name, **sizes.to_dict()}
    rows = [
        ("preset", p.name),
        ("bootstrapping keys", f"{format_binary(sizes.boot_bytes)} ({sizes.boot_bytes} B)"),
        ("key-switching key", f"{format_binary(sizes.ksk_bytes)} ({sizes.ksk_bytes} B)"),
        ("packed (log Q bits)", f"{format_binary(sizes.boot_bytes_packed)} + "
                                f"{format_binary(sizes.ksk_bytes_packed)}"),
    ]
    if args.materialize:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _, ek = keygen(p, np.random.default_rng(args.seed))
        bk_path, ksk_path = out / f"{p.name}.bk", out / f"{p.name}.ksk"
        bk_path.write_bytes(serialize.dump_bootstrapping_keys(ek.bk))
        ksk_path.write_bytes(serialize.dump_ksk(ek.ksk))
        record["files"] = {str(bk_path): bk_path.stat().st_size, str(ksk_path): ksk_path.stat().st_size}
        rows += [(str(f), f"{s} B on disk") for f, s in record["files"].items()]
    _emit(args, record, rows)
    return 0


def _report_rows(rep) -> list[tuple[str, object]]:
    return [
        ("preset", f"{rep.preset} ({rep.scheme})"),
        ("function", rep.function),
        ("trials / failures", f"{rep.trials} / {rep.failures}"),
        ("mean / max |error|", f"{rep.mean_abs_error:.3f} / {rep.max_abs_error}"),
        ("predicted proxy", f"{rep.predicted_proxy:.6g}"),
        ("ring mults / boot", f"{rep.ring_mults_per_bootstrap:g}"),
        ("time / boot (s)", f"{rep.wall_time_per_bootstrap:.4f}"),
        ("key sizes", f"{format_binary(rep.boot_key_bytes)} + {format_binary(rep.ksk_bytes)}"),
    ]


def cmd_run(args) -> int:
    p = _params(args)
    rep = run_experiment(p, args.function, args.trials, args.seed)
    _emit(args, rep.to_dict(include_timing=not args.no_timing), _report_rows(rep))
    return 0 if rep.failures == 0 else 1


def cmd_compare(args) -> int:
    p = _params(args)
    base = get_preset(args.baseline) if args.baseline else p.as_tfhe()
    cmp = compare_schemes(p, base, args.trials, args.seed, args.function)
    rows = [(f"mmpm {k}", v) for k, v in _report_rows(cmp.mmpm)]
    rows += [(f"tfhe {k}", v) for k, v in _report_rows(cmp.tfhe)]
    rows += [
        ("identical outputs", cmp.identical_outputs),
        ("boot key ratio", f"{cmp.key_size_ratio:g}"),
        ("time ratio tfhe/mmpm", f"{cmp.time_ratio:.3f}" if not math.isnan(cmp.time_ratio) else "n/a"),
    ]
    _emit(args, cmp.to_dict(include_timing=not args.no_timing), rows)
    failures = cmp.mmpm.failures + cmp.tfhe.failures
    return 0 if failures == 0 and cmp.identical_outputs else 1


def cmd_explore(args) -> int:
    spec = args.matrix
    if spec.startswith("@"):
        spec = Path(spec[1:]).read_text()
    info = mmpm_explore(spec)
    blocks = " ".join(f"[{b['size']}: {' '.join(map(str, b['exps']))}]" for b in info["normal_form"])
    rows = [
        ("r, N", f"{info['r']}, {info['N']}"),
        ("normal form", blocks),
        ("psi", " ".join(map(str, info["psi"]))),
        ("order", info["order"]),
        ("orbits", info["orbits"]),
        ("transitive", info["transitive"]),
    ]
    _emit(args, info, rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--preset", default="desk-small", help="one of: " + ", ".join(PRESETS))
    common.add_argument("--params", help="overrides, e.g. 'n=32,B=2**10'")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--csv", metavar="PATH", help="also write a one-row CSV")

    run_opts = argparse.ArgumentParser(add_help=False)
    run_opts.add_argument("--trials", type=int, default=100)
    run_opts.add_argument("--function", default="identity", help="identity | sign | table:<file>")
    run_opts.add_argument("--no-timing", action="store_true", help="omit wall time (bit-exact JSON)")

    ap = argparse.ArgumentParser(prog="mmpmboot", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("plan", parents=[common], help="noise budget and r selection").set_defaults(fn=cmd_plan)
    k = sub.add_parser("keys", parents=[common], help="key-size accounting")
    k.add_argument("--materialize", action="store_true", help="generate and write the keys")
    k.add_argument("--out", default="keys", help="directory for --materialize")
    k.set_defaults(fn=cmd_keys)
    sub.add_parser("run", parents=[common, run_opts], help="correctness experiment").set_defaults(fn=cmd_run)
    c = sub.add_parser("compare", parents=[common, run_opts], help="mmpm vs tfhe baseline")
    c.add_argument("--baseline", help="tfhe preset (default: <preset>-tfhe)")
    c.set_defaults(fn=cmd_compare)
    e = sub.add_parser("explore", parents=[common], help="inspect a monomial permutation matrix")
    e.add_argument("matrix", help="'r N; p0 .. p(r-1); u0 .. u(r-1)' or @file")
    e.set_defaults(fn=cmd_explore)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ParameterError, DomainError, OSError) as exc:
        print(f"mmpmboot: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
