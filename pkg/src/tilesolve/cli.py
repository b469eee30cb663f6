"""Command line interface.

Subcommands: ``run`` (manifest regression sweep), ``case`` (one vertex
combination), ``verify-pentagon`` (numeric geometry), ``check-tiling``
(combinatorial checks), ``roots`` (torsion solve of a polynomial).  All
structured output is schema-versioned JSON; a human summary goes to stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="tilesolve")
    sub = p.add_subparsers(dest="cmd", required=True)

    pr = sub.add_parser("run", help="run a case manifest and compare results")
    pr.add_argument("--manifest", help="JSON manifest (default: bundled)")
    pr.add_argument("--out", help="write the JSON report here")
    pr.add_argument("--jobs", type=int, default=1)
    pr.add_argument("--eliminate", choices=["x", "y", "z"],
                    help="override the eliminated variable for every case")
    pr.add_argument("--tolerance", type=float, default=1e-8,
                    help="geometry tolerance echoed into the report")
    pr.add_argument("--ids", nargs="*", help="run only these case ids")

    pc = sub.add_parser("case", help="run a single vertex combination")
    pc.add_argument("--vertices", required=True,
                    help='e.g. "a*d^2, b*d*e, a*b*c"')
    pc.add_argument("--subst", nargs="*",
                    help='substitution forms, e.g. 2*d F')
    pc.add_argument("--eliminate", choices=["x", "y", "z"])
    pc.add_argument("--out", help="write the JSON report here")

    pv = sub.add_parser("verify-pentagon", help="numeric pentagon geometry")
    pv.add_argument("--angles", required=True,
                    help="five rationals in units of pi: p1/q1,...,p5/q5")
    pv.add_argument("--tolerance", type=float, default=1e-8)

    pt = sub.add_parser("check-tiling", help="combinatorial tiling checks")
    pt.add_argument("--spec", required=True, help="TilingSpec JSON file")

    po = sub.add_parser("roots", help="roots-of-unity solutions of a polynomial")
    po.add_argument("--poly", required=True,
                    help='e.g. "(y+1)*(x^3*y^4 - ... )"')
    po.add_argument("--vars", default=None,
                    help="comma separated variable names (default: inferred)")
    po.add_argument("--eliminate", help="variable eliminated first")

    args = p.parse_args(argv)
    try:
        return _dispatch(args)
    except BrokenPipeError:
        return 2


def _dispatch(args) -> int:
    if args.cmd == "run":
        return _cmd_run(args)
    if args.cmd == "case":
        return _cmd_case(args)
    if args.cmd == "verify-pentagon":
        return _cmd_verify(args)
    if args.cmd == "check-tiling":
        return _cmd_tiling(args)
    if args.cmd == "roots":
        return _cmd_roots(args)
    return 2


def _elim_index(name):
    return {"x": 0, "y": 1, "z": 2, None: None}[name]


def _cmd_run(args) -> int:
    from .harness import bundled_manifest, load_manifest, run_manifest
    manifest = load_manifest(args.manifest) if args.manifest else \
        bundled_manifest()
    if args.eliminate:
        for c in manifest["cases"]:
            c["eliminate"] = _elim_index(args.eliminate)
    report = run_manifest(manifest, jobs=args.jobs, ids=args.ids)
    doc = report.to_dict()
    doc["tolerance"] = args.tolerance
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=1)
    counts = report.counts
    for o in report.outcomes:
        mark = {"match": "ok  ", "mismatch": "DIFF", "error": "ERR "}[o.status]
        print(f"{mark} {o.id:28s} {o.seconds:7.2f}s  {o.verdict}")
    print(f"total: {counts['match']} match, {counts['mismatch']} mismatch, "
          f"{counts['error']} error in {report.seconds:.1f}s")
    return report.exit_code


def _cmd_case(args) -> int:
    from .caseengine import run_case
    try:
        rep = run_case(args.vertices, substitution_texts=args.subst or None,
                       eliminate=_elim_index(args.eliminate))
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    doc = rep.to_dict()
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=1)
    print("angles:", {k: str(v) for k, v in rep.solved_angles.items()})
    print("polynomial:", rep.polynomial)
    print("torsion: %d points, %d families" % (rep.n_points, rep.n_families))
    print("verdict:", rep.verdict)
    return 0


def _cmd_verify(args) -> int:
    from . import spherical
    angles = [Fraction(a) for a in args.angles.split(",")]
    doc = {"schema": 1, "angles": [str(a) for a in angles]}
    resid = spherical.angle_identity_residual(angles)
    doc["identity_residual"] = resid
    print(f"angle identity residual: {resid:.3e}")
    try:
        cos_a = spherical.cos_a_from_angles(angles)
    except spherical.NotDetermined:
        print("cos a: not determined (symmetric pentagon)")
        print(json.dumps(doc))
        return 0
    except spherical.InconsistentAngles as exc:
        print(f"inconsistent: {exc}")
        doc["consistent"] = False
        print(json.dumps(doc))
        return 1
    import math
    doc["cos_a"] = cos_a
    print(f"cos a = {cos_a:.12f}")
    if not -1 < cos_a < 1:
        print("edge a is not realizable")
        print(json.dumps(doc))
        return 1
    try:
        geo = spherical.close_pentagon(angles, math.acos(cos_a),
                                       tolerance=args.tolerance)
        doc.update(cos_b=geo.cos_b, b=geo.b,
                   closure_residual=geo.closure_residual)
        print(f"cos b = {geo.cos_b:.12f}  "
              f"(closure residual {geo.closure_residual:.2e})")
    except spherical.ClosureFailed as exc:
        doc["closure_failed"] = str(exc)
        print(f"closure failed: {exc}")
        print(json.dumps(doc))
        return 1
    print(json.dumps(doc))
    return 0


def _cmd_tiling(args) -> int:
    from .combinat import TilingSpec, balance_check, parity_check, \
        vertex_anglesum_check
    with open(args.spec) as fh:
        raw = json.load(fh)
    spec = TilingSpec.parse(raw)
    doc = {"schema": 1, "f": str(spec.f)}
    ok = True
    parity = {str(vt): parity_check(vt) for vt, _ in spec.entries}
    doc["parity"] = parity
    ok &= all(parity.values())
    rep = balance_check(spec)
    doc["balance"] = {"ok": rep.ok,
                      "counts": {k: str(v) for k, v in rep.angle_counts.items()},
                      "diagnostics": rep.diagnostics}
    ok &= rep.ok
    if "angles" in raw:
        angles = [Fraction(a) for a in raw["angles"]]
        sums = {str(vt): vertex_anglesum_check(vt, angles)
                for vt, _ in spec.entries}
        doc["angle_sums"] = sums
        ok &= all(sums.values())
    doc["ok"] = bool(ok)
    print(json.dumps(doc, indent=1))
    return 0 if ok else 1


def _cmd_roots(args) -> int:
    from .laurent import parse_poly
    from .torsion import (cyclotomic_roots_of_laurent1, torsion_points_2var,
                          torsion_points_3var)
    text = args.poly
    if args.vars:
        names = tuple(args.vars.split(","))
    else:
        present = [v for v in "xyzuw" if v in text]
        base = [v for v in ("x", "y", "z") if v in present] or ["x"]
        names = tuple(base)
    L = parse_poly(text, names)
    doc = {"schema": 1, "vars": list(names)}
    elim = None
    if args.eliminate:
        elim = names.index(args.eliminate)
    if L.arity == 1 or len(names) == 1:
        roots = cyclotomic_roots_of_laurent1(L)
        doc["points"] = [[f"{t.p}/{t.q}"] for t in roots]
        doc["families"] = []
    elif len(names) == 2:
        sols = torsion_points_2var(L, eliminate=elim)
        doc["points"] = [[f"{t.p}/{t.q}" for t in pt] for pt in sols.points]
        doc["families"] = [_fam_dict(f) for f in sols.families]
    else:
        sols = torsion_points_3var(L, eliminate=elim)
        doc["points"] = [[f"{t.p}/{t.q}" for t in pt] for pt in sols.points]
        doc["families"] = [_fam_dict(f) for f in sols.families]
    print(json.dumps(doc, indent=1))
    return 0


def _fam_dict(fam):
    return {"relations": [{"coeffs": list(c), "rhs": str(r)}
                          for c, r in fam.relations]}


if __name__ == "__main__":
    sys.exit(main())
