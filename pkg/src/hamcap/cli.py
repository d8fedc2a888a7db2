"""Command-line front end.

Every command is a thin shell over one library operation; numeric logic
lives in the library modules.  Artifacts are written under --output-dir with
a manifest.json listing the produced files; outputs are byte-stable for
identical inputs.  The environment variable HAMCAP_SEED fixes the random
seeds used by the sweep commands.

Commands:
  capacity      evaluate the capacity formula
  orbits        analytic family enumeration plus a numeric shooting sweep
  spectrum      sorted action spectrum of a family Hamiltonian
  sharpness     certify the capacity lower bound at level m - delta
  exists        certify the existence bound for an admissible Hamiltonian
  homology      Betti, Morse-table, and dimension-table queries
  plot-profile  SVG plot of a profile and its derivative with tangents
  accept        run the full acceptance suite (nonzero exit on failure)
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import acceptance
from .errors import HamcapError
from .hamiltonians import ProductHamiltonian, outer_radial, reference_hamiltonian
from .homology_capacity import (betti_vector, capacity_formula,
                                morse_critical_table,
                                relative_symplectic_homology_dim,
                                symplectic_homology_dim, transfer_rank,
                                verify_existence, verify_sharpness,
                                window_homology_dim)
from .numeric_orbits import default_rng, sweep_orbits
from .orbit_analysis import action_spectrum, enumerate_families
from .phase_space import PhaseSpaceConfig
from .profiles import (ProfileFamily, ProfileFamilySpec, build_profile,
                       build_sharpness_profile)
from .reporting import OutputDir, dump_csv, dump_json, profile_plot_svg


def _parse_extended(text: str) -> float:
    if text == "-inf":
        return float("-inf")
    if text == "inf":
        return float("inf")
    return float(text)


def _add_geometry(parser, with_n=True):
    parser.add_argument("--R", type=float, required=True, help="annulus half-width")
    parser.add_argument("--u", type=float, default=0.0, help="marked level")
    if with_n:
        parser.add_argument("--n", type=int, default=1, help="torus factor count")


def _add_family(parser):
    parser.add_argument("--family", choices=["bump", "plateau"],
                        default="plateau")
    parser.add_argument("--s", type=float, default=-2.0,
                        help="family parameter, |s| >= 1")
    parser.add_argument("--c", type=float, default=1.0, help="marked level floor")
    parser.add_argument("--hamiltonian", type=str, default=None,
                        help="JSON Hamiltonian file (overrides family flags)")


def _load_hamiltonian(args, geometry, ell):
    if args.hamiltonian:
        with open(args.hamiltonian) as fh:
            return ProductHamiltonian.from_json(fh.read())
    return reference_hamiltonian(geometry, ProfileFamily(args.family),
                                 s=args.s, c=args.c, ell=max(1, abs(ell)))


def _geometry(args) -> PhaseSpaceConfig:
    return PhaseSpaceConfig(R=args.R, u=args.u, n=getattr(args, "n", 1))


def cmd_capacity(args) -> int:
    geo = _geometry(args)
    result = capacity_formula(geo, args.ell, args.a)
    print(f"{result.value:.12g}")
    out = OutputDir(args.output_dir, query=result.to_dict())
    out.write("capacity.json", dump_json(result.to_dict()))
    out.finish()
    return 0


def cmd_orbits(args) -> int:
    geo = _geometry(args)
    H = _load_hamiltonian(args, geo, args.ell)
    families = enumerate_families(H, args.ell)
    sweep = sweep_orbits(H, args.ell, seed_budget=args.seeds,
                         rng=default_rng(args.seed))
    payload = {
        "query": {"R": geo.R, "u": geo.u, "n": geo.n, "ell": args.ell},
        "analytic": [fam.to_dict() for fam in families],
        "sweep": sweep.to_dict(),
    }
    text = dump_json(payload)
    print(text, end="")
    out = OutputDir(args.output_dir, query=payload["query"])
    out.write("orbits.json", text)
    out.write("orbits.csv", dump_csv(
        ["action", "kind", "level", "dimension", "morseBott"],
        [[f.action, f.kind.value, f.level, f.dimension, f.morse_bott]
         for f in families]))
    out.finish()
    return 0


def cmd_spectrum(args) -> int:
    geo = _geometry(args)
    H = _load_hamiltonian(args, geo, args.ell)
    spec = action_spectrum(H, args.ell)
    rows = [[a, spec.families[i].kind.value, spec.families[i].level,
             spec.families[i].dimension, spec.families[i].morse_bott]
            for a, i in spec.entries]
    payload = {
        "query": {"R": geo.R, "u": geo.u, "n": geo.n, "ell": args.ell},
        "spectrum": [row[0] for row in rows],
    }
    if args.format == "csv":
        text = dump_csv(["action", "kind", "level", "dimension", "morseBott"],
                        rows)
    else:
        text = dump_json(payload)
    print(text, end="")
    out = OutputDir(args.output_dir, query=payload["query"])
    out.write(f"spectrum.{args.format}", text)
    out.finish()
    return 0


def cmd_sharpness(args) -> int:
    geo = _geometry(args)
    report = verify_sharpness(geo, args.ell, args.a, args.delta,
                              seed_budget=args.seeds,
                              rng=default_rng(args.seed))
    text = dump_json(report.to_dict())
    print(text, end="")
    out = OutputDir(args.output_dir, query=report.to_dict()["query"])
    out.write("sharpness.json", text)
    out.finish()
    return 0 if report.passes else 1


def cmd_exists(args) -> int:
    geo = _geometry(args)
    H = _load_hamiltonian(args, geo, args.ell)
    report = verify_existence(H, args.ell, rng=default_rng(args.seed))
    text = dump_json(report.to_dict())
    print(text, end="")
    out = OutputDir(args.output_dir, query=report.to_dict()["query"])
    out.write("exists.json", text)
    out.finish()
    return 0 if report.passes else 1


def cmd_homology(args) -> int:
    table = args.table
    payload = {"table": table, "n": args.n}
    if table == "betti":
        payload["dims"] = list(betti_vector(args.m or args.n).dims)
    elif table in ("morse-full", "morse-marked"):
        kind = "full" if table == "morse-full" else "marked"
        crit = morse_critical_table(kind, args.n)
        payload["points"] = [
            {"coordinates": list(pt.coordinates), "index": pt.index,
             "value": pt.value, "distinguished": pt.distinguished}
            for pt in crit.points
        ]
        payload["indexCounts"] = list(crit.index_counts)
        payload["minValue"] = crit.min_value
    elif table in ("sh", "rsh", "t-rank"):
        geo = PhaseSpaceConfig(R=args.R, u=args.u, n=args.n)
        ks = range(0, 2 * args.n + 2)
        if table == "sh":
            payload["dims"] = [symplectic_homology_dim(geo, args.ell, args.a, k)
                               for k in ks]
        elif table == "rsh":
            payload["dims"] = [
                relative_symplectic_homology_dim(geo, args.ell, args.a, args.c, k)
                for k in ks]
        else:
            payload["dims"] = [transfer_rank(geo, args.ell, args.a, args.c, k)
                               for k in ks]
        payload.update({"R": args.R, "u": args.u, "ell": args.ell,
                        "a": args.a, "c": args.c})
    elif table == "window":
        payload["dims"] = [window_homology_dim(args.n, k)
                           for k in range(0, 2 * args.n + 2)]
    else:
        raise ValueError(f"unknown table {table}")
    text = dump_json(payload)
    print(text, end="")
    out = OutputDir(args.output_dir, query={"table": table})
    out.write("homology.json", text)
    out.finish()
    return 0


def cmd_plot_profile(args) -> int:
    geo = _geometry(args)
    if args.family == "sharpness":
        profile = build_sharpness_profile(geo, args.ell, args.a, args.delta)
        scale = 1.0
        title = f"sharpness ell={args.ell} a={args.a:g} delta={args.delta:g}"
    else:
        spec = ProfileFamilySpec(family=ProfileFamily(args.family), s=args.s,
                                 c=args.c, geometry=geo,
                                 ell=max(1, abs(args.ell)))
        profile = build_profile(spec)
        scale = geo.R
        title = f"{args.family} s={args.s:g} c={args.c:g}"
    svg = profile_plot_svg(profile, scale, args.ell, title=title)
    out = OutputDir(args.output_dir, query={"family": args.family,
                                            "ell": args.ell})
    written = out.write("profile.svg", svg)
    out.finish()
    if written is None:
        print(svg, end="")
    else:
        print(written)
    return 0


def cmd_accept(args) -> int:
    results = acceptance.run_all()
    for res in results:
        print(res.line())
    out = OutputDir(args.output_dir, query={"command": "accept"})
    out.write("acceptance.json", dump_json(
        [{"index": r.index, "name": r.name, "pass": r.passed,
          "runtime": r.runtime, "detail": r.detail} for r in results]))
    out.finish()
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hamcap",
        description="Periodic orbits and relative capacities on the "
                    "annulus-torus phase space.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--output-dir", type=str, default=None)
        p.add_argument("--seed", type=int, default=None,
                       help="override HAMCAP_SEED")

    p = sub.add_parser("capacity", help="evaluate the capacity formula")
    _add_geometry(p)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--a", type=_parse_extended, default=float("-inf"),
                   help="action threshold; -inf allowed")
    common(p)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("orbits", help="enumerate families and sweep")
    _add_geometry(p)
    _add_family(p)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--seeds", type=int, default=1000)
    common(p)
    p.set_defaults(func=cmd_orbits)

    p = sub.add_parser("spectrum", help="sorted action spectrum")
    _add_geometry(p)
    _add_family(p)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("sharpness", help="verify the capacity lower bound")
    _add_geometry(p)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--a", type=_parse_extended, default=float("-inf"))
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--seeds", type=int, default=1000)
    common(p)
    p.set_defaults(func=cmd_sharpness)

    p = sub.add_parser("exists", help="verify the existence bound")
    _add_geometry(p)
    _add_family(p)
    p.add_argument("--ell", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_exists)

    p = sub.add_parser("homology", help="dimension tables")
    p.add_argument("--table", required=True,
                   choices=["betti", "morse-full", "morse-marked", "sh",
                            "rsh", "t-rank", "window"])
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--m", type=int, default=None,
                   help="torus dimension for the betti table")
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--u", type=float, default=0.0)
    p.add_argument("--ell", type=int, default=1)
    p.add_argument("--a", type=_parse_extended, default=1.5)
    p.add_argument("--c", type=_parse_extended, default=2.0)
    common(p)
    p.set_defaults(func=cmd_homology)

    p = sub.add_parser("plot-profile", help="SVG of a profile and derivative")
    _add_geometry(p)
    p.add_argument("--family", choices=["bump", "plateau", "sharpness"],
                   default="plateau")
    p.add_argument("--s", type=float, default=-2.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--ell", type=int, default=1)
    p.add_argument("--a", type=_parse_extended, default=float("-inf"))
    p.add_argument("--delta", type=float, default=0.1)
    common(p)
    p.set_defaults(func=cmd_plot_profile)

    p = sub.add_parser("accept", help="run the acceptance suite")
    common(p)
    p.set_defaults(func=cmd_accept)

    return parser


def _merge_negative_values(argv):
    """Join '--flag -value' pairs so argparse accepts -inf and negatives."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok.startswith("--") and "=" not in tok and i + 1 < len(argv):
            nxt = argv[i + 1]
            if nxt.startswith("-") and nxt != "-":
                try:
                    _parse_extended(nxt)
                except ValueError:
                    pass
                else:
                    out.append(f"{tok}={nxt}")
                    i += 2
                    continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(_merge_negative_values(list(argv)))
    try:
        return args.func(args)
    except HamcapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
