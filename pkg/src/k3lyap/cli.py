"""Command-line front end: k3lyap {families, clifford-check, weights, simulate, ks-lift}.

Exit codes: 0 success, 2 usage or parameter error, 3 mathematical
precondition failure, 4 internal inconsistency.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__, clifford, families, hypflow, lyapunov, rootsys
from .quadlat import QuadlatError, QuadraticSpace, signature

SCHEMA_VERSION = "1"
MAX_CLIFFORD_N = 8

EXIT_OK, EXIT_USAGE, EXIT_MATH, EXIT_INTERNAL = 0, 2, 3, 4

REPS = ("standard", "sym2", "wedge2-sum", "spin-of-sym2", "custom")
REP_ALIASES = {"spin-of(sym2)": "spin-of-sym2", "spin_of_sym2": "spin-of-sym2",
               "wedge2_sum": "wedge2-sum", "sym²": "sym2"}

DEFAULTS = {"dt": 1.0, "renorm": 4.0, "burn_in": 1000.0, "time": 10000.0,
            "trajectories": 4, "seed": 0}


class UsageError(Exception):
    pass


class MathError(Exception):
    pass


class InternalError(Exception):
    pass


def _envelope(argv, result) -> dict:
    return {"schema_version": SCHEMA_VERSION, "k3lyap_version": __version__,
            "command": shlex.join(["k3lyap"] + list(argv)), "result": result}


def _emit(text: str, output: str | None):
    if output:
        with open(output, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


# -- families --------------------------------------------------------------------------

def cmd_families(args, argv) -> int:
    if args.all:
        reports = families.all_reports()
    elif args.name:
        try:
            reports = [families.report(args.name)]
        except families.UnknownFamilyError as exc:
            raise UsageError(str(exc)) from exc
    else:
        raise UsageError("give a family name or --all")
    if args.format == "json":
        _emit(_dumps(_envelope(argv, [r.to_dict() for r in reports])), args.output)
    elif args.format == "csv":
        _emit(families.format_csv(reports), args.output)
    else:
        _emit(families.format_table(reports), args.output)
    return EXIT_OK


# -- clifford-check --------------------------------------------------------------------

def clifford_audit(n: int) -> dict:
    frame = clifford.HodgePlaneFrame.standard(n)
    ident = clifford.verify_k3_identities(frame)
    rank = clifford.cl10_even_rank(frame)
    basis = clifford.cl10_even_basis(frame)
    in_cl10 = all(clifford.is_cl10(frame, b) for b in basis)
    try:
        sign = clifford.resolve_ks_sign(frame, frame.e1, frame.e2)
        definite = True
    except clifford.InconsistencyError:
        sign, definite = 0, False
    checks = dict(ident["checks"])
    checks["cl10_even_rank"] = rank == 2 ** n
    checks["cl10_basis_is_J_eigen"] = in_cl10
    checks["ks_polarization_definite"] = definite
    return {"n": n, "dim_space": n + 2, "dim_cl10_even": rank, "expected": 2 ** n,
            "ks_sign": sign, "orientation": ident["orientation"], "checks": checks,
            "passed": all(checks.values())}


def cmd_clifford_check(args, argv) -> int:
    if not 1 <= args.n <= MAX_CLIFFORD_N:
        raise UsageError(f"n={args.n} out of range 1..{MAX_CLIFFORD_N}: the algebra has "
                         f"dimension 2^(n+2) and exact audits grow exponentially")
    rep = clifford_audit(args.n)
    if args.format == "json":
        _emit(_dumps(_envelope(argv, rep)), args.output)
    else:
        lines = [f"Clifford audit n={rep['n']}  dim Cl10 n Cl+ = {rep['dim_cl10_even']}  "
                 f"KS sign = {rep['ks_sign']:+d}"]
        lines += [f"  {'PASS' if ok else 'FAIL'}  {name}" for name, ok in rep["checks"].items()]
        _emit("\n".join(lines), args.output)
    return EXIT_OK if rep["passed"] else EXIT_MATH


# -- weights ---------------------------------------------------------------------------

def cmd_weights(args, argv) -> int:
    try:
        tab = rootsys.weight_table(args.type, args.rank)
    except (rootsys.RankError, rootsys.UnsupportedError) as exc:
        raise UsageError(str(exc)) from exc
    if args.format == "json":
        _emit(_dumps(_envelope(argv, tab)), args.output)
    elif args.format == "csv":
        lines = ["rep,c1,c2,multiplicity"]
        for rep, rows in tab["tables"].items():
            lines += [f"{rep},{r['weight'][0]},{r['weight'][1]},{r['multiplicity']}"
                      for r in rows]
        _emit("\n".join(lines), args.output)
    else:
        _emit(rootsys.format_table(args.type, args.rank), args.output)
    return EXIT_OK


# -- representation files ----------------------------------------------------------------

def _scalar(x):
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, int):
        return Fraction(x)
    return float(x)


def load_rep_file(path: str) -> dict:
    """{form: Gram matrix, generators: {label: matrix}, relations: [words]}."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise UsageError(f"representation file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"representation file is not valid JSON: {exc}") from exc
    unknown = set(data) - {"form", "generators", "relations", "name"}
    if unknown:
        raise UsageError(f"unknown keys in representation file: {sorted(unknown)}")
    if "form" not in data or "generators" not in data:
        raise UsageError("representation file needs 'form' and 'generators'")
    form = [[_scalar(x) for x in row] for row in data["form"]]
    gens = {k: [[_scalar(x) for x in row] for row in m] for k, m in data["generators"].items()}
    rels = [[(str(l), int(p)) for l, p in w] for w in data.get("relations", [])]
    return {"form": form, "generators": gens, "relations": rels}


def _as_space(form) -> QuadraticSpace:
    if any(isinstance(x, float) for row in form for x in row):
        form = [[Fraction(x).limit_denominator(10**9) for x in row] for row in form]
    try:
        return QuadraticSpace(form)
    except QuadlatError as exc:
        raise MathError(str(exc)) from exc


# -- simulate --------------------------------------------------------------------------

def build_cocycle(preset_name: str, rep: str, rep_file: str | None = None):
    try:
        P = hypflow.preset(preset_name)
    except hypflow.CatalogError as exc:
        raise UsageError(str(exc)) from exc
    rep = REP_ALIASES.get(rep, rep)
    base = lyapunov.standard_cocycle(P)
    if rep == "standard":
        return base, {"kind": "standard"}
    if rep == "sym2":
        return lyapunov.sym2(base), {"kind": "sym2", "n": 1}
    if rep == "wedge2-sum":
        c = lyapunov.wedge2(lyapunov.direct_sum(base, base))
        return c, {"kind": "wedge2-sum", "n": 4, "reducible": True}
    if rep == "spin-of-sym2":
        c = lyapunov.spin_lift(lyapunov.sym2(base))
        return c, {"kind": "spin-of-sym2", "spin_of_n": 1,
                   "lift_residuals": c.lift_residuals}
    if rep == "custom":
        if not rep_file:
            raise UsageError("--rep custom needs --rep-file")
        data = load_rep_file(rep_file)
        form = np.array([[float(x) for x in row] for row in data["form"]])
        gens = {k: np.array([[float(x) for x in row] for row in m])
                for k, m in data["generators"].items()}
        missing = set(P.generators) - set(gens)
        if missing:
            raise UsageError(f"representation file lacks generators {sorted(missing)}")
        c = lyapunov.Cocycle(gens, P, form, "custom",
                             relations=data["relations"] or None)
        p, q, z = signature(_as_space(data["form"]).gram)
        info = {"kind": "custom", "signature": [p, q, z]}
        if p == 2 and z == 0:
            info["n"] = q
        return c, info
    raise UsageError(f"unknown representation {rep!r}; choose from {', '.join(REPS)}")


def cmd_simulate(args, argv) -> int:
    cocycle, info = build_cocycle(args.preset, args.rep, args.rep_file)
    try:
        cfg = lyapunov.EstimatorConfig(dt=args.dt, renorm=args.renorm, burn_in=args.burn_in,
                                       total_time=args.time, trajectories=args.trajectories,
                                       seed=args.seed)
    except lyapunov.LyapunovError as exc:
        raise UsageError(str(exc)) from exc

    start = time.monotonic()

    def progress(i, sums):
        if args.quiet:
            return
        rate = sums.sum(axis=0) / cfg.measured_time
        top = ", ".join(f"{x:.4f}" for x in sorted(rate, reverse=True)[:3])
        sys.stderr.write(f"[k3lyap] trajectory {i + 1}/{cfg.trajectories} done "
                         f"({time.monotonic() - start:.1f}s): top exponents {top}\n")

    try:
        est = lyapunov.estimate_spectrum(cocycle, cfg, progress=progress)
    except (lyapunov.RelationError, lyapunov.SingularCocycleError,
            lyapunov.RenormPeriodError) as exc:
        raise MathError(str(exc)) from exc
    except lyapunov.LyapunovError as exc:
        raise MathError(str(exc)) from exc
    result = {"preset": hypflow.preset(args.preset).name, "representation": info,
              "dimension": cocycle.dim, "relation_signs": cocycle.relation_signs,
              "estimate": est.to_dict()}
    if "n" in info:
        result["checks"] = lyapunov.spectrum_report_checks(est, info["n"],
                                                            reducible=info.get("reducible", False))
    elif "spin_of_n" in info:
        result["checks"] = {
            "note": "expected {+-(l1 +- l2)/2} of the underlying (2, n) spectrum, "
                    f"each with multiplicity 2^(n-1), n = {info['spin_of_n']}",
            "antisymmetry_defect": max(abs(a + b) for a, b in zip(est.values, est.values[::-1]))}
    else:
        result["checks"] = {"antisymmetry_defect": max(abs(a + b) for a, b in
                                                       zip(est.values, est.values[::-1]))}
    if args.format == "json":
        _emit(_dumps(_envelope(argv, result)), args.output)
    elif args.format == "csv":
        lines = ["value_raw,value_halved,multiplicity,stderr_raw"]
        for e in est.exponents:
            lines.append(f"{e['value']!r},{e['value'] * lyapunov.HALVED_FACTOR!r},"
                         f"{e['multiplicity']},{e['stderr']!r}")
        _emit("\n".join(lines), args.output)
    else:
        lines = [f"{result['preset']} / {info['kind']}  dim {cocycle.dim}  "
                 f"T={cfg.total_time:g} x {cfg.trajectories}  seed {cfg.seed}",
                 "  raw        halved     mult  stderr"]
        for e in est.exponents:
            lines.append(f"  {e['value']:+.5f}  {e['value'] / 2:+.5f}  {e['multiplicity']:>4}"
                         f"  {e['stderr']:.2e}")
        lines += [f"  note: {x}" for x in est.notes]
        _emit("\n".join(lines), args.output)
    return EXIT_OK


# -- ks-lift ---------------------------------------------------------------------------

def ks_lift_file(path: str, tol: float = 1e-9) -> dict:
    data = load_rep_file(path)
    space = _as_space(data["form"])
    p, q, z = signature(space.gram)
    if z or p != 2:
        raise MathError(f"form has signature ({p},{q},{z}); expected (2, n)")
    alg = clifford.CliffordAlgebra(space)
    n = q
    out_gens, residuals, norms, factors = {}, {}, {}, {}
    for label, M in data["generators"].items():
        try:
            g = clifford.reflection_lift(M, alg, tol=tol)
        except clifford.FormViolationError as exc:
            raise MathError(f"generator {label}: {exc}") from exc
        except clifford.CliffordError as exc:
            raise MathError(f"generator {label}: {exc}") from exc
        back = np.asarray(clifford.conjugation_matrix(g, tol=1e-7), dtype=float)
        residuals[label] = float(np.max(np.abs(back - np.asarray(
            [[float(x) for x in row] for row in M]))))
        S = np.asarray(clifford.spin_matrix(g), dtype=float) / np.sqrt(abs(float(g.norm)))
        out_gens[label] = S.tolist()
        norms[label] = str(g.norm)
        factors[label] = len(g.factorization)
    cocycle = lyapunov.Cocycle({k: np.array(v) for k, v in out_gens.items()},
                               relations=data["relations"])
    try:
        signs = cocycle.validate()
    except lyapunov.RelationError as exc:
        raise MathError(str(exc)) from exc
    dim = 2 ** (n + 1)
    if cocycle.dim != dim:
        raise InternalError(f"lift has dimension {cocycle.dim}, expected {dim}")
    return {"n": n, "dimension": dim, "generators": out_gens,
            "relations": [[[l, p] for l, p in w] for w in data["relations"]],
            "relation_signs": signs,
            "index_2_cover_required": any(s < 0 for s in signs),
            "round_trip_residuals": residuals, "max_residual": max(residuals.values(), default=0.0),
            "clifford_norms": norms, "reflection_counts": factors}


def cmd_ks_lift(args, argv) -> int:
    rep = ks_lift_file(args.input)
    if rep["max_residual"] > 1e-9:
        raise InternalError(f"round-trip residual {rep['max_residual']:.3g} exceeds 1e-9")
    text = _dumps(_envelope(argv, rep))
    if args.format == "json":
        _emit(text, args.output)
    else:
        if args.output:
            _emit(text, args.output)
        lines = [f"spin lift: n={rep['n']}  dimension {rep['dimension']}  "
                 f"max residual {rep['max_residual']:.2e}",
                 f"  relation signs {rep['relation_signs']}"
                 + ("  (index-2 cover required)" if rep["index_2_cover_required"] else "")]
        sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


# -- parser ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="k3lyap", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"k3lyap {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, formats=("json", "csv", "table"), default="table"):
        p.add_argument("--format", choices=formats, default=default)
        p.add_argument("--output", "-o", help="write to this file instead of stdout")

    p = sub.add_parser("families", help="exact top exponent for the catalog families")
    p.add_argument("name", nargs="?", help=f"one of {', '.join(families.CATALOG)}")
    p.add_argument("--all", action="store_true")
    common(p)
    p.set_defaults(func=cmd_families)

    p = sub.add_parser("clifford-check", help="exact audit of the Kuga-Satake identities")
    p.add_argument("--n", type=int, required=True)
    common(p, ("json", "table"))
    p.set_defaults(func=cmd_clifford_check)

    p = sub.add_parser("weights", help="restricted weight tables of so(2, n)")
    p.add_argument("--type", choices=("B", "D"), required=True)
    p.add_argument("--rank", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("simulate", help="Monte-Carlo Lyapunov spectrum over a geodesic flow")
    p.add_argument("--preset", default="modular")
    p.add_argument("--rep", default="standard", help=f"one of {', '.join(REPS)}")
    p.add_argument("--rep-file")
    p.add_argument("--time", type=float, default=DEFAULTS["time"],
                   help="flow time per trajectory, burn-in included")
    p.add_argument("--trajectories", type=int, default=DEFAULTS["trajectories"])
    p.add_argument("--seed", type=int, default=DEFAULTS["seed"])
    p.add_argument("--dt", type=float, default=DEFAULTS["dt"])
    p.add_argument("--renorm", type=float, default=DEFAULTS["renorm"])
    p.add_argument("--burn-in", type=float, default=DEFAULTS["burn_in"])
    p.add_argument("--quiet", action="store_true", help="no checkpoints on stderr")
    common(p, default="json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ks-lift", help="spin lift of an orthogonal representation file")
    p.add_argument("--input", required=True)
    common(p, ("json", "table"), default="json")
    p.set_defaults(func=cmd_ks_lift)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, argv)
    except UsageError as exc:
        sys.stderr.write(f"k3lyap: error: {exc}\n")
        return EXIT_USAGE
    except MathError as exc:
        sys.stderr.write(f"k3lyap: precondition failed: {exc}\n")
        return EXIT_MATH
    except InternalError as exc:
        sys.stderr.write(f"k3lyap: internal inconsistency: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
