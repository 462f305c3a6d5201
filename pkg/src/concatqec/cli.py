"""Command-line interface.

Subcommands:
    montecarlo <config.json>      full sampled run, writes CSV/JSON outputs
    average-recursion             strict average channel across levels
    threshold                     on-threshold fidelity + SD attenuation
    effective                     one round on explicitly given channels
    codes export                  error table CSV + encoding unitary JSON
    fixtures list                 the transcribed arbitrary-noise channels
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .channels import channel_fidelity, channel_to_json, json_to_natural, kraus_to_ptm
from .codes import error_table_rows, get_code
from .effective import average_recursion, effective_ptm
from .experiment import (
    DEFAULT_N0,
    ExperimentConfig,
    attenuation_report,
    run_and_write,
    threshold_search,
)
from .noise import FIXTURES, BaseModelSpec, PerturbedModelSpec, average_perturbed


def _base_from_args(args) -> BaseModelSpec:
    return BaseModelSpec(
        kind=args.base,
        f=args.f,
        fixture=getattr(args, "fixture", None),
        seed=getattr(args, "base_seed", None),
    )


def _write_or_print(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _cmd_montecarlo(args) -> int:
    with open(args.config) as fh:
        cfg = ExperimentConfig.from_dict(json.load(fh))
    out_dir = args.out_dir or cfg.out_dir
    if out_dir is None:
        print("error: no out_dir in config and no --out-dir given", file=sys.stderr)
        return 2
    stats = run_and_write(cfg, out_dir, workers=args.workers)
    print(f"wrote {out_dir}/ (levels 0..{cfg.levels}, N0 = {cfg.n0})")
    print("level  F_strict      F_bar         dF            R_F")
    for st in stats:
        rf = "-" if st.ratio_fidelity is None else f"{st.ratio_fidelity:.4f}"
        print(
            f"{st.level:>5}  {st.strict_avg_fidelity:.9f}  "
            f"{st.sample_mean_fidelity:.9f}  {st.sd_fidelity:.6e}  {rf}"
        )
    for row in attenuation_report(stats):
        if row.offdiag_speedup is not None:
            print(
                f"level {row.level}: off-diagonal SDs attenuate "
                f"{row.offdiag_speedup:.1f}x faster than diagonal"
            )
    return 0


def _cmd_average_recursion(args) -> int:
    code = get_code(args.code)
    spec = PerturbedModelSpec(_base_from_args(args), args.k, allow_large_k=args.allow_large_k)
    rec = average_recursion(code, average_perturbed(spec), args.levels)
    payload = {
        "code": args.code,
        "levels": [
            {"level": l, "fidelity": f, "ptm": [[float(x) for x in row] for row in p]}
            for l, (p, f) in enumerate(zip(rec.ptms, rec.fidelities))
        ],
    }
    _write_or_print(json.dumps(payload, indent=2), args.out)
    return 0


def _cmd_threshold(args) -> int:
    code = get_code(args.code)
    res = threshold_search(
        code,
        args.base,
        args.k,
        base_seed=args.base_seed,
        n0=args.n0,
        levels=args.levels,
        seed=args.seed,
        workers=args.workers,
    )
    payload = {
        "code": args.code,
        "base": args.base,
        "k": args.k,
        "threshold_fidelity": res.threshold_fidelity,
        "base_fidelity": res.base_fidelity,
        "on_threshold_R_F": list(res.ratios),
    }
    _write_or_print(json.dumps(payload, indent=2), args.out)
    return 0


def _cmd_effective(args) -> int:
    code = get_code(args.code)
    with open(args.layer) as fh:
        objs = json.load(fh)
    if not isinstance(objs, list):
        raise ValueError("layer file must hold a JSON list of channel objects")
    layer = [json_to_natural(obj) for obj in objs]
    eta = effective_ptm(code, layer)
    if args.csv:
        text = "\n".join(",".join(f"{x:.16e}" for x in row) for row in eta)
    else:
        text = json.dumps(channel_to_json("ptm", eta), indent=2)
    _write_or_print(text, args.out)
    return 0


def _cmd_codes_export(args) -> int:
    import os

    code = get_code(args.code)
    os.makedirs(args.out_dir, exist_ok=True)
    table_path = os.path.join(args.out_dir, f"{args.code}_errors.csv")
    with open(table_path, "w", newline="") as fh:
        fh.write("m,pauli,syndrome\n")
        for m, pauli, syn in error_table_rows(code):
            fh.write(f"{m},{pauli},{syn}\n")
    unitary_path = os.path.join(args.out_dir, f"{args.code}_unitary.json")
    with open(unitary_path, "w") as fh:
        json.dump(channel_to_json("unitary", code.encoding_unitary), fh)
        fh.write("\n")
    print(f"wrote {table_path} and {unitary_path}")
    return 0


def _cmd_fixtures_list(args) -> int:
    for name in sorted(FIXTURES):
        fid = channel_fidelity(kraus_to_ptm(list(FIXTURES[name])))
        print(f"{name}: {len(FIXTURES[name])} Kraus operators, channel fidelity {fid:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="concatqec",
        description="Effective channels of concatenated QEC codes under fluctuating noise",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("montecarlo", help="run a sampled experiment from a JSON config")
    p.add_argument("config", help="path to the experiment config (JSON)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", default=None, help="override the config's out_dir")
    p.set_defaults(func=_cmd_montecarlo)

    def add_model_args(p, need_f=True):
        p.add_argument("--code", required=True, choices=("five", "steane", "shor"))
        p.add_argument(
            "--base",
            required=True,
            choices=("depolarizing", "amplitude_damping", "fixture", "random_cptp"),
        )
        p.add_argument("--k", type=float, required=True)
        if need_f:
            p.add_argument("--f", type=float, default=None, help="base-model fidelity")
            p.add_argument("--fixture", default=None, help="fixture name for --base fixture")
        p.add_argument("--base-seed", type=int, default=None, help="seed for random_cptp base")

    p = sub.add_parser("average-recursion", help="strict average channel per level")
    add_model_args(p)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--allow-large-k", action="store_true")
    p.add_argument("--out", default=None, help="output JSON path (default stdout)")
    p.set_defaults(func=_cmd_average_recursion)

    p = sub.add_parser("threshold", help="find the error-correction threshold")
    add_model_args(p, need_f=False)
    p.add_argument("--n0", type=int, default=None, help=f"sample count (defaults: {DEFAULT_N0})")
    p.add_argument("--levels", type=int, default=2)
    p.add_argument("--seed", type=int, default=20240921)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_threshold)

    p = sub.add_parser("effective", help="one QEC round on explicit per-qubit channels")
    p.add_argument("--code", required=True, choices=("five", "steane", "shor"))
    p.add_argument("--layer", required=True, help="JSON list of n serialized channels")
    p.add_argument("--out", default=None)
    p.add_argument("--csv", action="store_true", help="write a bare 4x4 CSV instead of JSON")
    p.set_defaults(func=_cmd_effective)

    p = sub.add_parser("codes", help="code table utilities")
    codes_sub = p.add_subparsers(dest="codes_command", required=True)
    pe = codes_sub.add_parser("export", help="write the error table and encoding unitary")
    pe.add_argument("--code", required=True, choices=("five", "steane", "shor"))
    pe.add_argument("--out-dir", required=True)
    pe.set_defaults(func=_cmd_codes_export)

    p = sub.add_parser("fixtures", help="appendix fixture channels")
    fix_sub = p.add_subparsers(dest="fixtures_command", required=True)
    pl = fix_sub.add_parser("list", help="list fixture names and fidelities")
    pl.set_defaults(func=_cmd_fixtures_list)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
