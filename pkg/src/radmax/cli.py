"""Command-line interface: compute maximal functions, verify, sweep ratios.

    radmax compute --geometry rd --d 2 --operator heat --input prof.csv --output out
    radmax verify  [--only geometry] [--baseline path.json] [--output report.json]
    radmax sweep   --output table.csv [--d 2,3,4,5]

A plain-text key=value config file can preset any flag (--config); explicit
flags win over the file.  All randomness sits behind --seed.  Exit codes:
0 success / all checks pass, 1 verification failures, 2 usage or input
errors, 3 verify ran in record mode (no baselines found).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .corpus import corpus_names, corpus_profiles
from .euclid_kernels import KernelSpec
from .euclid_maximal import hl_centered_radial, hl_uncentered_radial, maximal_convolution
from .profiles import (InvalidProfileError, PolarProfile, RadialProfile,
                       gradient_l1, gradient_l1_sphere, read_profile_csv)
from .results import atomic_write_text, detachment_components, write_result
from .shell_tables import polar_shell_table, radial_shell_table
from .sphere_maximal import (hl_auxiliary_sphere, hl_centered_sphere,
                             hl_uncentered_sphere, maximal_sphere_convolution)
from .verify import load_bundled_baselines, run_suite

_OPERATORS = {
    "rd": {"heat": "heat_rd", "poisson": "poisson_rd", "phi11": "phi11_rd",
           "hl-centered": "hl_centered", "hl-uncentered": "hl_uncentered"},
    "sphere": {"heat": "heat_sphere", "poisson": "poisson_sphere",
               "hl-centered": "hl_centered", "hl-uncentered": "hl_uncentered",
               "hl-aux-i": "hl_aux_i"},
}


def _read_config(path: str) -> dict:
    out = {}
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"malformed config line: {line!r}")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser):
    if not getattr(args, "config", None):
        return args
    overrides = _read_config(args.config)
    defaults = {a.dest: a.default for a in parser._actions}
    for key, value in overrides.items():
        if not hasattr(args, key):
            continue
        # flags win over the file: only fill values still at their default
        if getattr(args, key) == defaults.get(key):
            current = getattr(args, key)
            cast = type(current) if current is not None else str
            setattr(args, key, cast(value) if cast is not bool else value.lower() in ("1", "true", "yes"))
    return args


def _compute_result(geometry: str, d: int, operator_key: str, profile, seed: int,
                    tol: float | None):
    op = _OPERATORS[geometry][operator_key]
    if geometry == "rd":
        table = radial_shell_table(profile)
        if op == "hl_centered":
            return hl_centered_radial(profile, table=table, tol=tol)
        if op == "hl_uncentered":
            return hl_uncentered_radial(profile, table=table, tol=tol)
        return maximal_convolution(profile, KernelSpec(op, d), table=table, tol=tol)
    table = polar_shell_table(profile)
    if op == "hl_centered":
        return hl_centered_sphere(profile, table=table, tol=tol)
    if op == "hl_uncentered":
        return hl_uncentered_sphere(profile, table=table, tol=tol)
    if op == "hl_aux_i":
        return hl_auxiliary_sphere(profile, table=table, tol=tol)
    return maximal_sphere_convolution(profile, KernelSpec(op, d), table=table, tol=tol)


def cmd_compute(args) -> int:
    if args.operator not in _OPERATORS.get(args.geometry, {}):
        print(f"error: operator {args.operator!r} is not valid for geometry {args.geometry!r}",
              file=sys.stderr)
        return 2
    try:
        profile = read_profile_csv(args.input)
    except (OSError, InvalidProfileError) as exc:
        print(f"error: cannot read profile: {exc}", file=sys.stderr)
        return 2
    expected = RadialProfile if args.geometry == "rd" else PolarProfile
    if not isinstance(profile, expected):
        print(f"error: {args.input} holds a {'polar' if expected is RadialProfile else 'radial'} "
              f"profile but geometry is {args.geometry}", file=sys.stderr)
        return 2
    if profile.d != args.d:
        profile = expected(args.d, profile.nodes, profile.values)

    result = _compute_result(args.geometry, args.d, args.operator, profile,
                             args.seed, args.tol)
    write_result(result, csv_path=args.output + ".csv", json_path=args.output + ".json")

    grad = gradient_l1 if args.geometry == "rd" else gradient_l1_sphere
    denom = grad(profile)
    ratio = grad(profile.with_values(result.values)) / denom if denom > 0 else float("nan")
    comps = detachment_components(result)
    print(f"operator={args.operator} geometry={args.geometry} d={args.d} nodes={len(profile.nodes)}")
    print(f"gradient_ratio={ratio:.6g}")
    print(f"detachment_components={len(comps)}")
    if comps:
        first = comps[0]
        print(f"detachment_boundary={profile.nodes[first.first]:.6g}")
    print(f"wrote {args.output}.csv {args.output}.json")
    return 0


def cmd_verify(args) -> int:
    baselines = None
    record = bool(args.record)
    if args.baseline:
        try:
            with open(args.baseline, "r", encoding="ascii") as fh:
                baselines = json.load(fh)
        except FileNotFoundError:
            record = True
    elif not record:
        baselines = load_bundled_baselines() or None
        record = baselines is None

    report = run_suite(only=args.only, baselines=baselines, record=record,
                       seed=args.seed, gradient_dims=tuple(int(x) for x in args.dims.split(",")))
    for check in report.sorted_checks():
        status = "PASS" if check.passed else "FAIL"
        print(f"[{status}] {check.name}: measured={check.measured:.6g} "
              f"threshold={check.threshold:.6g} {check.note}")
    if args.output:
        atomic_write_text(args.output, report.to_json() + "\n")
        print(f"wrote {args.output}")
    if record:
        target = args.baseline or "baselines.recorded.json"
        atomic_write_text(target, json.dumps(report.recorded_baselines, indent=1, sort_keys=True) + "\n")
        print(f"record mode: wrote {target}")
        return 3
    return 0 if report.all_passed else 1


def cmd_sweep(args) -> int:
    dims = tuple(int(x) for x in args.dims.split(","))
    rows = ["geometry,d,operator,profile,gradient_ratio"]
    for geometry in ("rd", "sphere"):
        operators = [k for k in _OPERATORS[geometry] if k != "hl-centered"]
        for d in dims:
            for name, profile in corpus_profiles(geometry, d, n=args.nodes):
                grad = gradient_l1 if geometry == "rd" else gradient_l1_sphere
                denom = grad(profile)
                table = (radial_shell_table if geometry == "rd" else polar_shell_table)(profile)
                for op_key in operators:
                    op = _OPERATORS[geometry][op_key]
                    if geometry == "rd":
                        if op == "hl_uncentered":
                            res = hl_uncentered_radial(profile, table=table)
                        else:
                            res = maximal_convolution(profile, KernelSpec(op, d), table=table)
                    else:
                        if op == "hl_uncentered":
                            res = hl_uncentered_sphere(profile, table=table)
                        elif op == "hl_aux_i":
                            res = hl_auxiliary_sphere(profile, table=table)
                        else:
                            res = maximal_sphere_convolution(profile, KernelSpec(op, d), table=table)
                    ratio = grad(profile.with_values(res.values)) / denom if denom > 0 else float("nan")
                    rows.append(f"{geometry},{d},{op_key},{name},{ratio:.12g}")
    text = "\n".join(rows) + "\n"
    atomic_write_text(args.output, text)
    print(f"wrote {args.output} ({len(rows) - 1} rows)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radmax",
                                     description="maximal functions of radial/polar data")
    sub = parser.add_subparsers(dest="command", required=True)

    p_compute = sub.add_parser("compute", help="compute one maximal function")
    p_compute.add_argument("--geometry", choices=("rd", "sphere"), required=True)
    p_compute.add_argument("--d", type=int, required=True)
    p_compute.add_argument("--operator", required=True,
                           choices=sorted({k for ops in _OPERATORS.values() for k in ops}))
    p_compute.add_argument("--input", required=True)
    p_compute.add_argument("--output", required=True)
    p_compute.add_argument("--tol", type=float, default=None)
    p_compute.add_argument("--seed", type=int, default=0xC0FFEE)
    p_compute.add_argument("--config", default=None)
    p_compute.set_defaults(fn=cmd_compute)

    p_verify = sub.add_parser("verify", help="run the verification suite")
    p_verify.add_argument("--only", default=None)
    p_verify.add_argument("--baseline", default=None)
    p_verify.add_argument("--output", default=None)
    p_verify.add_argument("--record", action="store_true")
    p_verify.add_argument("--seed", type=int, default=0xC0FFEE)
    p_verify.add_argument("--dims", default="2,3,4,5")
    p_verify.add_argument("--config", default=None)
    p_verify.set_defaults(fn=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="tabulate gradient ratios over corpus x operator x d")
    p_sweep.add_argument("--output", required=True)
    p_sweep.add_argument("--dims", default="2,3,4,5")
    p_sweep.add_argument("--nodes", type=int, default=256)
    p_sweep.add_argument("--seed", type=int, default=0xC0FFEE)
    p_sweep.add_argument("--config", default=None)
    p_sweep.set_defaults(fn=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args = _apply_config(args, parser)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
