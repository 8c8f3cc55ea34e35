"""Command-line interface: constants, spectra, degeneration sweeps, comparisons,
and the acceptance suite.

Exit status: 0 on success, 1 when a verification criterion or comparison fails,
2 on usage errors.  Identical invocations (including --seed) produce
byte-identical output files; names embed a hash of the parameters.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import closed_form as cf
from . import experiments as ex
from .errors import InvalidParameterError
from .gluing import build_metric_mesh
from .meshes import FlatCylinder, MobiusCylinder, UnitDisk
from .dtn import steklov_spectrum
from .spectra import Spectrum, spectrum_csv, spectrum_rows

USAGE_ERROR = 2


def _outdir(args) -> str:
    out = os.environ.get("STEKLOV_OUT") or args.out
    os.makedirs(out, exist_ok=True)
    return out


def _write_text(path: str, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)


def _dump_json(path: str, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, default=repr)
        fh.write("\n")


def cmd_constants(args) -> int:
    out = _outdir(args)
    constants = [c.as_dict() for c in cf.all_constants(10)]
    if args.format == "csv":
        lines = ["name,equation,value,residual"]
        lines += [f"{c['name']},\"{c['equation']}\",{c['value']!r},{c['residual']!r}"
                  for c in constants]
        _write_text(os.path.join(out, "constants.csv"), "\n".join(lines) + "\n")
    else:
        _dump_json(os.path.join(out, "constants.json"), constants)
    for c in constants:
        print(f"{c['name']:>10} = {c['value']:.12f}   ({c['equation']}, "
              f"residual {c['residual']:.1e})")
    return 0


def _surface_spec(args):
    if args.surface == "disk":
        return UnitDisk()
    if args.surface == "cylinder":
        return FlatCylinder(args.T, args.density)
    if args.surface == "mobius":
        return MobiusCylinder(args.T, args.density)
    raise InvalidParameterError(f"unknown surface {args.surface!r}")


def _spectrum_pair(args) -> dict[str, Spectrum]:
    spec = _surface_spec(args)
    out: dict[str, Spectrum] = {}
    if args.method in ("closed-form", "both"):
        out["closed-form"] = cf.spectrum_for(spec, args.count)
    if args.method in ("fem", "both"):
        mesh = build_metric_mesh(spec, args.resolution)
        out["fem"] = steklov_spectrum(mesh, args.count)
    return out


def cmd_spectrum(args) -> int:
    if args.surface in ("cylinder", "mobius") and args.T is None:
        raise InvalidParameterError("--T is required for cylinder and mobius surfaces")
    if args.T is not None and args.T <= 0:
        raise InvalidParameterError("--T must be positive")
    if args.count < 1:
        raise InvalidParameterError("--count must be >= 1")
    spectra = _spectrum_pair(args)
    out = _outdir(args)
    tag = f"{args.surface}" + (f"-T{args.T:g}" if args.T is not None else "")
    for method, spec in spectra.items():
        stem = os.path.join(out, f"spectrum-{tag}-{method}")
        if args.format == "json":
            _dump_json(stem + ".json", spectrum_rows(spec))
        else:
            _write_text(stem + ".csv", spectrum_csv(spec))
    if args.method == "both":
        a = spectra["closed-form"].eigenvalues
        b = spectra["fem"].eigenvalues
        rows = []
        for k in range(len(a)):
            scale = max(abs(a[k]), 1e-12)
            rows.append({"k": k, "closed_form": float(a[k]), "fem": float(b[k]),
                         "rel_discrepancy": float(abs(a[k] - b[k]) / scale)})
        _dump_json(os.path.join(out, f"spectrum-{tag}-discrepancy.json"), rows)
        worst = max(r["rel_discrepancy"] for r in rows[1:])
        print(f"worst relative discrepancy (k >= 1): {worst:.3e}")
    for method, spec in spectra.items():
        head = ", ".join(f"{v:.6g}" for v in spec.eigenvalues[:8])
        print(f"{method}: L = {spec.boundary_length:.6f}; sigma = [{head}]")
    return 0


PRESETS = ("two-disks", "k-disks", "catenoid-disk", "mobius-critical")


def _preset_components(preset: str, k: int):
    if preset == "two-disks":
        return [UnitDisk(), UnitDisk()], 2
    if preset == "k-disks":
        return [UnitDisk()] * k, k
    if preset == "catenoid-disk":
        return [cf.critical_catenoid_metric()] + [UnitDisk()] * (k - 1), k
    if preset == "mobius-critical":
        return [cf.critical_mobius_metric()] + [UnitDisk()] * (k - 1), k
    raise InvalidParameterError(f"unknown preset {preset!r}")


def cmd_sweep(args) -> int:
    rho_list = tuple(float(tok) for tok in args.rho.split(","))
    if not rho_list or any(r <= 0 for r in rho_list):
        raise InvalidParameterError("--rho must be a comma list of positive numbers")
    if any(b >= a for a, b in zip(rho_list, rho_list[1:])):
        raise InvalidParameterError("--rho must be strictly decreasing")
    components, k_default = _preset_components(args.preset, args.k or 2)
    k = args.k or k_default
    sweep = ex.glue_sweep(components, k, rho_list, args.resolution)
    rows = []
    for row in sweep.rows:
        if row.failure:
            rows.append({"rho": row.rho, "failure": row.failure})
            continue
        entry = {"rho": row.rho, "boundary_length": row.boundary_length,
                 "sigma_bar_k": row.spectrum.sigma_bar(k),
                 "target_sigma_bar_k": sweep.target.sigma_bar(k)}
        for j, err in enumerate(row.eigenvalue_errors):
            entry[f"err_sigma_{j}"] = err
        if row.neck_fractions is not None:
            for j, frac in enumerate(row.neck_fractions):
                entry[f"neck_fraction_{j}"] = frac
        rows.append(entry)
    target = sweep.target.sigma_bar(k)
    done = [r for r in rows if "failure" not in r]
    verdict = "pass" if done and abs(done[-1]["sigma_bar_k"] - target) <= 0.05 * target \
        else "fail"
    params = {"preset": args.preset, "k": k, "rho": list(rho_list),
              "resolution": args.resolution, "seed": args.seed}
    paths = ex.write_report(_outdir(args), f"sweep-{args.preset}", params, rows, verdict)
    print(f"target sigma_bar_{k} = {target:.6f}")
    for r in rows:
        if "failure" in r:
            print(f"rho={r['rho']:g}: FAILED {r['failure']}")
        else:
            print(f"rho={r['rho']:g}: sigma_bar_{k} = {r['sigma_bar_k']:.6f}, "
                  f"L = {r['boundary_length']:.6f}")
    print(f"verdict: {verdict}; report: {paths['json']}")
    return 0 if verdict == "pass" else 1


def cmd_compare(args) -> int:
    if args.k < 2:
        raise InvalidParameterError("--k must be >= 2 for the comparison")
    record = ex.noninvariant_comparison(args.surface, args.k)
    params = {"surface": args.surface, "k": args.k}
    paths = ex.write_report(_outdir(args), "compare", params,
                            [record.as_dict()], record.verdict)
    print(f"{args.surface} k={args.k}: glued limit {record.glued_limit:.6f} vs "
          f"invariant supremum {record.invariant_supremum:.6f} "
          f"(margin {record.margin:+.6f})")
    print(f"verdict: {record.verdict}; report: {paths['json']}")
    return 0 if record.verdict == "pass" else 1


def cmd_verify(args) -> int:
    from . import acceptance
    results = acceptance.run_all()
    for res in results:
        print(res.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    out = _outdir(args)
    payload = [{"index": r.index, "name": r.name, "passed": r.passed,
                "seconds": r.seconds, "details": r.details} for r in results]
    _dump_json(os.path.join(out, "verify.json"), payload)
    return 0 if not failed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steklov",
        description="Steklov spectra of disks, cylinders and Moebius bands: "
                    "closed forms, a finite-element oracle, and neck experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default="steklov-out",
                       help="output directory (STEKLOV_OUT overrides)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("constants", help="transcendental constants with residuals")
    common(p)
    p.set_defaults(fn=cmd_constants)

    p = sub.add_parser("spectrum", help="Steklov spectrum of one surface")
    p.add_argument("--surface", choices=("disk", "cylinder", "mobius"), required=True)
    p.add_argument("--T", type=float, default=None, help="chart height")
    p.add_argument("--density", type=float, default=1.0, help="boundary density")
    p.add_argument("--count", type=int, default=8)
    p.add_argument("--method", choices=("closed-form", "fem", "both"),
                   default="closed-form")
    p.add_argument("--resolution", type=float, default=0.03)
    common(p)
    p.set_defaults(fn=cmd_spectrum)

    p = sub.add_parser("sweep", help="neck-degeneration sweep toward a disjoint union")
    p.add_argument("--preset", choices=PRESETS, required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--rho", default="0.2,0.1,0.05,0.025", help="comma list, decreasing")
    p.add_argument("--resolution", type=float, default=0.04)
    common(p)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("compare", help="glued limit vs circle-invariant supremum")
    p.add_argument("--surface", choices=("annulus", "mobius"), required=True)
    p.add_argument("--k", type=int, required=True)
    common(p)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("verify", help="run the acceptance suite")
    common(p)
    p.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except InvalidParameterError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
