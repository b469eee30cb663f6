"""Manifest runner: execute classification cases and compare against records.

The manifest is JSON (schema 1): a list of case entries carrying the vertex
types, the solver-variable substitution, optionally the expected polynomial
(compared up to a nonzero constant and a monomial factor), and the expected
solution rows.  Reports are JSON with per-case status; the exit code contract
is 0 = all match, 1 = any mismatch, 2 = internal error.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .caseengine import CandidateSolution, CaseReport, run_case
from .laurent import LaurentPoly, format_poly, parse_poly, poly_equal_up_to_unit

SCHEMA = 1


class ManifestError(ValueError):
    pass


def load_manifest(path_or_dict) -> dict:
    if isinstance(path_or_dict, dict):
        m = path_or_dict
    else:
        with open(path_or_dict) as fh:
            m = json.load(fh)
    if m.get("schema") != SCHEMA:
        raise ManifestError(f"unsupported manifest schema {m.get('schema')}")
    ids = [c["id"] for c in m.get("cases", [])]
    if len(ids) != len(set(ids)):
        raise ManifestError("duplicate case ids")
    for c in m.get("cases", []):
        for row in c.get("expected", []):
            if "angles" in row and len(row["angles"]) != 5:
                raise ManifestError(f"case {c['id']}: need five angles")
    return m


def bundled_manifest() -> dict:
    """The regression manifest shipped with the package."""
    text = resources.files("tilesolve").joinpath(
        "data/appendix_cases.json").read_text()
    return load_manifest(json.loads(text))


def compare_polynomial(computed: LaurentPoly, printed: str,
                       var_names=("x", "y")) -> bool:
    """Equality up to a nonzero constant of the field and a monomial factor."""
    target = parse_poly(printed, var_names)
    return poly_equal_up_to_unit(computed, target)


def _expected_key(row) -> tuple:
    if "family" in row:
        return ("family", row["family"].replace(" ", ""))
    angles = tuple(str(Fraction(a)) for a in row["angles"])
    return (int(row["f"]), angles)


def _candidate_key(c: CandidateSolution) -> tuple:
    if c.f == "family":
        return ("family", (c.family_formula or "").replace(" ", ""))
    return (c.f, tuple(str(a) for a in c.angles))


@dataclass
class CaseOutcome:
    id: str
    status: str  # match | mismatch | error
    verdict: str = ""
    expected: list = field(default_factory=list)
    got: list = field(default_factory=list)
    missing: list = field(default_factory=list)
    extra: list = field(default_factory=list)
    polynomial_ok: bool | None = None
    error: str = ""
    seconds: float = 0.0
    annotation: str = ""
    report: dict | None = None

    def to_dict(self):
        out = {
            "id": self.id,
            "status": self.status,
            "verdict": self.verdict,
            "seconds": round(self.seconds, 3),
        }
        if self.expected or self.got:
            out["expected"] = [list(map(str, e)) for e in self.expected]
            out["got"] = [list(map(str, g)) for g in self.got]
        if self.missing:
            out["missing"] = [list(map(str, e)) for e in self.missing]
        if self.extra:
            out["extra"] = [list(map(str, e)) for e in self.extra]
        if self.polynomial_ok is not None:
            out["polynomial_match"] = self.polynomial_ok
        if self.error:
            out["error"] = self.error
        if self.annotation:
            out["annotation"] = self.annotation
        return out


def run_entry(entry: dict) -> CaseOutcome:
    """Run one manifest case and compare with its recorded results."""
    t0 = time.time()
    out = CaseOutcome(id=entry["id"], status="error",
                      annotation=entry.get("annotation", ""))
    try:
        rep = run_case(entry["vertices"],
                       substitution_texts=entry.get("substitution"),
                       eliminate=entry.get("eliminate"))
        out.verdict = rep.verdict
        expected = sorted(_expected_key(r) for r in entry.get("expected", []))
        got = sorted(_candidate_key(c) for c in rep.accepted)
        out.expected, out.got = expected, got
        out.missing = [e for e in expected if e not in got]
        out.extra = [g for g in got if g not in expected]
        ok = not out.missing and not out.extra
        if "polynomial" in entry:
            vars_ = tuple(entry.get("vars", ("x", "y")))
            target = parse_poly(entry["polynomial"], vars_)
            from .caseengine import (build_case_polynomial,
                                     parse_affine_form_with_angles,
                                     parse_case, solve_angle_system)
            sys = solve_angle_system(parse_case(entry["vertices"]))
            subs = [parse_affine_form_with_angles(t, sys)
                    for t in entry["substitution"]]
            L = build_case_polynomial(sys, subs)
            out.polynomial_ok = poly_equal_up_to_unit(L, target)
            ok = ok and out.polynomial_ok
        out.status = "match" if ok else "mismatch"
        out.report = rep.to_dict()
    except Exception as exc:  # reported per entry, the run continues
        out.status = "error"
        out.error = f"{type(exc).__name__}: {exc}"
    out.seconds = time.time() - t0
    return out


@dataclass
class RunReport:
    outcomes: list
    seconds: float

    @property
    def counts(self):
        c = {"match": 0, "mismatch": 0, "error": 0}
        for o in self.outcomes:
            c[o.status] += 1
        return c

    @property
    def exit_code(self) -> int:
        c = self.counts
        if c["error"]:
            return 2
        return 0 if c["mismatch"] == 0 else 1

    def to_dict(self):
        return {
            "schema": SCHEMA,
            "counts": self.counts,
            "seconds": round(self.seconds, 3),
            "cases": [o.to_dict() for o in
                      sorted(self.outcomes, key=lambda o: o.id)],
        }


def run_manifest(manifest: dict, jobs: int = 1, ids=None) -> RunReport:
    """Execute every case (optionally a subset by id), in parallel if asked."""
    t0 = time.time()
    entries = manifest.get("cases", [])
    if ids:
        wanted = set(ids)
        entries = [e for e in entries if e["id"] in wanted]
    if jobs > 1 and len(entries) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run_entry, entries))
    else:
        outcomes = [run_entry(e) for e in entries]
    outcomes.sort(key=lambda o: o.id)
    return RunReport(outcomes, time.time() - t0)
